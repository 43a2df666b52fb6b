//! Plain-text tableau form of a [`LinearProgram`].
//!
//! ```text
//! lp maximize vars 2 rows 1
//! objective 1 1
//! bounds nonneg free
//! 1 1 <= 1
//! ```
//!
//! Entries use [`Scalar::encode`]: `p/q` for rationals, 17 significant
//! digits for doubles. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use super::{LinearProgram, LpError, Sense, VarBound};
use crate::scalar::Scalar;

impl<T: Scalar> LinearProgram<T> {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let join = |xs: &[T]| xs.iter().map(T::encode).collect::<Vec<_>>().join(" ");
        writeln!(
            out,
            "lp maximize vars {} rows {}",
            self.num_vars(),
            self.num_rows()
        )
        .unwrap();
        writeln!(out, "objective {}", join(&self.objective)).unwrap();
        let bounds: Vec<&str> = self
            .bounds
            .iter()
            .map(|b| match b {
                VarBound::NonNegative => "nonneg",
                VarBound::Free => "free",
            })
            .collect();
        writeln!(out, "bounds {}", bounds.join(" ")).unwrap();
        for ((row, b), s) in self.rows.iter().zip(&self.rhs).zip(&self.senses) {
            writeln!(out, "{} {s} {}", join(row), b.encode()).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, LpError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let err = |line: usize, msg: &str| LpError::Parse {
            line,
            msg: msg.to_string(),
        };
        let num = |line: usize, tok: &str| -> Result<T, LpError> {
            T::decode(tok).ok_or_else(|| err(line, &format!("bad number {tok:?}")))
        };

        let (ln, header) = lines.next().ok_or_else(|| err(0, "empty input"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let (n, rows): (usize, usize) = match h.as_slice() {
            ["lp", "maximize", "vars", n, "rows", r] => (
                n.parse().map_err(|_| err(ln, "bad variable count"))?,
                r.parse().map_err(|_| err(ln, "bad row count"))?,
            ),
            _ => return Err(err(ln, "expected `lp maximize vars N rows R`")),
        };

        let (ln, line) = lines.next().ok_or_else(|| err(ln, "missing objective"))?;
        let objective = match line.strip_prefix("objective") {
            Some(rest) => rest
                .split_whitespace()
                .map(|t| num(ln, t))
                .collect::<Result<Vec<T>, _>>()?,
            None => return Err(err(ln, "expected `objective`")),
        };

        let (ln, line) = lines.next().ok_or_else(|| err(ln, "missing bounds"))?;
        let bounds = match line.strip_prefix("bounds") {
            Some(rest) => rest
                .split_whitespace()
                .map(|t| match t {
                    "nonneg" => Ok(VarBound::NonNegative),
                    "free" => Ok(VarBound::Free),
                    _ => Err(err(ln, &format!("bad bound {t:?}"))),
                })
                .collect::<Result<Vec<_>, _>>()?,
            None => return Err(err(ln, "expected `bounds`")),
        };

        let mut a = Vec::with_capacity(rows);
        let mut rhs = Vec::with_capacity(rows);
        let mut senses = Vec::with_capacity(rows);
        for (ln, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() < 2 {
                return Err(err(ln, "constraint row too short"));
            }
            let sense = match toks[toks.len() - 2] {
                "<=" => Sense::Le,
                "=" => Sense::Eq,
                ">=" => Sense::Ge,
                t => return Err(err(ln, &format!("bad sense {t:?}"))),
            };
            a.push(
                toks[..toks.len() - 2]
                    .iter()
                    .map(|t| num(ln, t))
                    .collect::<Result<Vec<T>, _>>()?,
            );
            senses.push(sense);
            rhs.push(num(ln, toks[toks.len() - 1])?);
        }
        if objective.len() != n || a.len() != rows {
            return Err(LpError::Dimension(format!(
                "header says {n} variables and {rows} rows, found {} and {}",
                objective.len(),
                a.len()
            )));
        }
        LinearProgram::new(objective, a, rhs, senses, bounds)
    }
}
