//! Text formats for complex matrices.
//!
//! Dense CSV holds one matrix row per line, entries written as `re` or
//! `re+imj`. Sparse COO starts with `coo <rows> <cols>` followed by one
//! `i j re im` line per stored entry, indices zero-based. Floats are written
//! in shortest round-trip form so both formats reproduce the matrix bit for bit.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn format_entry(z: C64) -> String {
    if z.im.to_bits() == 0 {
        return fmt_f64(z.re);
    }
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", fmt_f64(z.re), sign, fmt_f64(z.im.abs()))
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Format {
        line,
        msg: format!("cannot parse number `{s}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Format {
            line,
            msg: format!("non-finite value `{s}`"),
        });
    }
    Ok(v)
}

pub fn parse_entry(raw: &str, line: usize) -> Result<C64> {
    let s = raw.trim();
    if s.is_empty() {
        return Err(Error::Format {
            line,
            msg: "empty entry".into(),
        });
    }
    let Some(body) = s.strip_suffix('j').or_else(|| s.strip_suffix('i')) else {
        return Ok(C64::new(parse_f64(s, line)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = parse_f64(&body[..k], line)?;
            let im_str = &body[k..];
            let im = if im_str == "+" || im_str == "-" {
                if im_str == "-" { -1.0 } else { 1.0 }
            } else {
                parse_f64(im_str.strip_prefix('+').unwrap_or(im_str), line)?
            };
            Ok(C64::new(re, im))
        }
        None => Ok(C64::new(0.0, parse_f64(body, line)?)),
    }
}

pub fn write_dense_csv(m: &CMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_entry(m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_dense_csv(text: &str) -> Result<CMatrix> {
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|e| parse_entry(e, idx + 1))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Format {
                    line: idx + 1,
                    msg: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format {
            line: 0,
            msg: "no rows".into(),
        });
    }
    let ncols = rows[0].len();
    Ok(CMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub fn write_coo(m: &CMatrix) -> String {
    let mut out = format!("coo {} {}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if z.re.to_bits() != 0 || z.im.to_bits() != 0 {
                out.push_str(&format!("{i} {j} {} {}\n", fmt_f64(z.re), fmt_f64(z.im)));
            }
        }
    }
    out
}

pub fn parse_coo(text: &str) -> Result<CMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(Error::Format {
        line: 0,
        msg: "missing header".into(),
    })?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "coo" {
        return Err(Error::Format {
            line: hline,
            msg: "header must be `coo <rows> <cols>`".into(),
        });
    }
    let dim = |s: &str| {
        s.parse::<usize>().map_err(|_| Error::Format {
            line: hline,
            msg: format!("bad dimension `{s}`"),
        })
    };
    let (nr, nc) = (dim(parts[1])?, dim(parts[2])?);
    let mut m = CMatrix::zeros(nr, nc);
    let mut seen = std::collections::HashSet::new();
    for (ln, l) in lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 4 {
            return Err(Error::Format {
                line: ln,
                msg: "expected `i j re im`".into(),
            });
        }
        let idx = |s: &str, bound: usize| -> Result<usize> {
            let v = s.parse::<usize>().map_err(|_| Error::Format {
                line: ln,
                msg: format!("bad index `{s}`"),
            })?;
            if v >= bound {
                return Err(Error::Format {
                    line: ln,
                    msg: format!("index {v} out of bounds {bound}"),
                });
            }
            Ok(v)
        };
        let (i, j) = (idx(f[0], nr)?, idx(f[1], nc)?);
        if !seen.insert((i, j)) {
            return Err(Error::Format {
                line: ln,
                msg: format!("duplicate entry ({i}, {j})"),
            });
        }
        m[(i, j)] = C64::new(parse_f64(f[2], ln)?, parse_f64(f[3], ln)?);
    }
    Ok(m)
}

/// Dense CSV or COO, detected from the first non-empty line.
pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or("");
    if first.starts_with("coo") {
        parse_coo(text)
    } else {
        parse_dense_csv(text)
    }
}

/// A vector stored as a single dense row or a single dense column.
pub fn parse_vector(text: &str) -> Result<CVector> {
    let m = parse_matrix(text)?;
    if m.ncols() == 1 {
        Ok(m.column(0).into_owned())
    } else if m.nrows() == 1 {
        Ok(m.row(0).transpose().into_owned())
    } else {
        Err(Error::DimensionMismatch(format!(
            "expected a vector, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

pub fn write_vector(v: &CVector) -> String {
    v.iter().map(|&z| format_entry(z) + "\n").collect()
}
