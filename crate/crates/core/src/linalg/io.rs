//! Plain-text matrix/vector format: a `dim=N` header followed by row-major
//! comma-separated entries. Complex entries are written `a+bi`.

use crate::error::{Error, Result};
use crate::{CMat, CVec, C64};

pub fn parse_scalar(token: &str) -> Result<C64> {
    let s: String = token.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty scalar token".into()));
    }
    let bad = || Error::Parse(format!("invalid scalar '{token}'"));
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().map(|v| C64::new(v, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is not an exponent sign or the leading sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_part, im_part) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let re = if re_part.is_empty() {
        0.0
    } else {
        re_part.parse::<f64>().map_err(|_| bad())?
    };
    let im = match im_part {
        "" | "+" => 1.0,
        "-" => -1.0,
        p => p.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(C64::new(re, im))
}

pub fn format_scalar(z: C64) -> String {
    if z.im == 0.0 {
        format!("{:.17e}", z.re)
    } else {
        format!("{:.17e}{:+.17e}i", z.re, z.im)
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_header(line: &str) -> Result<usize> {
    let rest = line
        .strip_prefix("dim=")
        .or_else(|| line.strip_prefix("dim ="))
        .ok_or_else(|| Error::Parse(format!("expected 'dim=N' header, got '{line}'")))?;
    let n: usize = rest
        .trim()
        .trim_end_matches(',')
        .parse()
        .map_err(|_| Error::Parse(format!("invalid dimension in '{line}'")))?;
    if n == 0 {
        return Err(Error::Parse("dimension must be positive".into()));
    }
    Ok(n)
}

fn parse_row(line: &str) -> Result<Vec<C64>> {
    line.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_scalar)
        .collect()
}

pub fn parse_matrix(text: &str) -> Result<CMat> {
    let mut lines = data_lines(text);
    let (_, head) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let n = parse_header(head)?;
    let mut entries = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (lineno, line) in lines {
        let row = parse_row(line)?;
        if row.len() != n {
            return Err(Error::Parse(format!(
                "line {lineno}: expected {n} entries, got {}",
                row.len()
            )));
        }
        entries.extend(row);
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse(format!("expected {n} rows, got {rows}")));
    }
    Ok(CMat::from_row_slice(n, n, &entries))
}

/// Accepts either one line of `N` entries or `N` lines of one entry.
pub fn parse_vector(text: &str) -> Result<CVec> {
    let mut lines = data_lines(text);
    let (_, head) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty vector file".into()))?;
    let n = parse_header(head)?;
    let mut entries = Vec::with_capacity(n);
    for (_, line) in lines {
        entries.extend(parse_row(line)?);
    }
    if entries.len() != n {
        return Err(Error::Parse(format!(
            "expected {n} vector entries, got {}",
            entries.len()
        )));
    }
    Ok(CVec::from_vec(entries))
}

pub fn format_matrix(a: &CMat) -> String {
    let mut out = format!("dim={}\n", a.nrows());
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| format_scalar(a[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn format_vector(x: &CVec) -> String {
    let mut out = format!("dim={}\n", x.len());
    for z in x.iter() {
        out.push_str(&format_scalar(*z));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scalar_forms() {
        assert_eq!(parse_scalar("1.5").unwrap(), C64::new(1.5, 0.0));
        assert_eq!(parse_scalar("-2e-3").unwrap(), C64::new(-2e-3, 0.0));
        assert_eq!(parse_scalar("1+2i").unwrap(), C64::new(1.0, 2.0));
        assert_eq!(parse_scalar("1-2.5i").unwrap(), C64::new(1.0, -2.5));
        assert_eq!(parse_scalar("2i").unwrap(), C64::new(0.0, 2.0));
        assert_eq!(parse_scalar("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_scalar("1e-3+4e-2i").unwrap(), C64::new(1e-3, 4e-2));
        assert_eq!(parse_scalar(" -1e+2 - 3E-1i ").unwrap(), C64::new(-100.0, -0.3));
        assert!(parse_scalar("abc").is_err());
        assert!(parse_scalar("1+xi").is_err());
    }

    #[test]
    fn matrix_file() {
        let a = parse_matrix("dim=2\n-1, 1\n0, -2\n").unwrap();
        assert_eq!(a[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(a[(1, 1)], C64::new(-2.0, 0.0));
        assert!(parse_matrix("dim=2\n-1,1\n").is_err());
        assert!(parse_matrix("dim=2\n-1,1,3\n0,1\n").is_err());
        assert!(parse_matrix("-1,1\n0,1\n").is_err());
    }

    #[test]
    fn vector_layouts() {
        let a = parse_vector("dim=3\n1,2,3\n").unwrap();
        let b = parse_vector("dim=3\n1\n2\n3\n").unwrap();
        assert_eq!(a, b);
        assert!(parse_vector("dim=3\n1,2\n").is_err());
    }

    proptest! {
        #[test]
        fn scalar_round_trip(re in -1e6f64..1e6, im in -1e6f64..1e6) {
            let z = C64::new(re, im);
            prop_assert_eq!(parse_scalar(&format_scalar(z)).unwrap(), z);
        }
    }
}
