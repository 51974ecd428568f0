//! Plain-text sparse dump of a covering instance:
//!
//! ```text
//! <num_rows> <num_vars>
//! <row>: <col>:<coeff> <col>:<coeff> ... >= <rhs>
//! ```

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::instance::{CoverRow, CoveringInstance, InstanceError};

#[derive(Debug, Error)]
pub enum DumpError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

pub fn write_instance<W: Write>(instance: &CoveringInstance, mut w: W) -> io::Result<()> {
    writeln!(w, "{} {}", instance.num_rows(), instance.num_vars())?;
    for (r, row) in instance.rows().iter().enumerate() {
        write!(w, "{r}:")?;
        for &(c, a) in &row.entries {
            write!(w, " {c}:{a}")?;
        }
        writeln!(w, " >= {}", row.rhs)?;
    }
    Ok(())
}

/// Reads a dump back as a single-sub-constellation instance (the dump does
/// not record block structure).
pub fn read_instance<R: BufRead>(reader: R) -> Result<CoveringInstance, DumpError> {
    let syntax = |line: usize, message: &str| DumpError::Syntax {
        line,
        message: message.to_string(),
    };
    let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(l) if l.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let (hline, header) = lines.next().ok_or_else(|| syntax(1, "missing header"))?;
    let header = header?;
    let mut it = header.split_whitespace();
    let num_rows: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| syntax(hline, "expected row count"))?;
    let num_vars: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| syntax(hline, "expected variable count"))?;
    let mut rows = Vec::with_capacity(num_rows);
    for (lineno, line) in lines {
        let line = line?;
        let (idx, rest) = line.split_once(':').ok_or_else(|| syntax(lineno, "expected `row:`"))?;
        let idx: usize = idx.trim().parse().map_err(|_| syntax(lineno, "bad row index"))?;
        if idx != rows.len() {
            return Err(syntax(lineno, "row indices must be consecutive from 0"));
        }
        let (lhs, rhs) = rest.split_once(">=").ok_or_else(|| syntax(lineno, "missing `>=`"))?;
        let rhs: u32 = rhs.trim().parse().map_err(|_| syntax(lineno, "bad right-hand side"))?;
        let mut entries = Vec::new();
        for tok in lhs.split_whitespace() {
            let (c, a) = tok
                .split_once(':')
                .ok_or_else(|| syntax(lineno, "expected `col:coeff`"))?;
            let c: usize = c.parse().map_err(|_| syntax(lineno, "bad column"))?;
            let a: u32 = a.parse().map_err(|_| syntax(lineno, "bad coefficient"))?;
            entries.push((c, a));
        }
        rows.push(CoverRow {
            target: 0,
            time: idx,
            entries,
            rhs,
        });
    }
    if rows.len() != num_rows {
        return Err(syntax(
            hline,
            &format!("header says {num_rows} rows, found {}", rows.len()),
        ));
    }
    Ok(CoveringInstance::from_rows(1, num_vars, rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::{CoverageProblem, CoverageRequirement};
    use crate::geodesy::AccessProfile;

    #[test]
    fn round_trip() {
        let p = CoverageProblem::single(
            vec![AccessProfile::from_bits(&[1, 1, 0, 0])],
            vec![CoverageRequirement::new(vec![1, 0, 2, 1])],
        )
        .unwrap();
        let inst = CoveringInstance::assemble(&p).unwrap();
        let mut buf = Vec::new();
        write_instance(&inst, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("3 4\n0: 0:1 3:1 >= 1\n"));
        let back = read_instance(&buf[..]).unwrap();
        assert_eq!(back.num_rows(), 3);
        assert_eq!(back.num_vars(), 4);
        for (a, b) in back.rows().iter().zip(inst.rows()) {
            assert_eq!((&a.entries, a.rhs), (&b.entries, b.rhs));
        }
    }

    #[test]
    fn syntax_errors_carry_line() {
        let err = read_instance("1 2\n0: 0:1 1:1 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DumpError::Syntax { line: 2, .. }));
        assert!(read_instance("2 2\n0: 0:1 >= 1\n".as_bytes()).is_err());
        assert!(read_instance("".as_bytes()).is_err());
    }
}
