use std::fmt::Write as _;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome counts of a run. Test rounds are indexed `[x][y][a][b]`,
/// generation rounds `[a][b]` with Bob's actual output before it is
/// discarded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialTally {
    pub test: [[[[u64; 2]; 2]; 2]; 2],
    pub generation: [[u64; 2]; 2],
}

impl AddAssign<&TrialTally> for TrialTally {
    fn add_assign(&mut self, rhs: &TrialTally) {
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        self.test[x][y][a][b] += rhs.test[x][y][a][b];
                    }
                }
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                self.generation[a][b] += rhs.generation[a][b];
            }
        }
    }
}

impl TrialTally {
    pub fn test_rounds(&self) -> u64 {
        self.test.iter().flatten().flatten().flatten().sum()
    }

    pub fn generation_rounds(&self) -> u64 {
        self.generation.iter().flatten().sum()
    }

    pub fn rounds(&self) -> u64 {
        self.test_rounds() + self.generation_rounds()
    }

    pub fn setting_total(&self, x: usize, y: usize) -> u64 {
        self.test[x][y].iter().flatten().sum()
    }

    pub fn setting_wins(&self, x: usize, y: usize) -> u64 {
        let c = &self.test[x][y];
        if x & y == 0 {
            c[0][0] + c[1][1]
        } else {
            c[0][1] + c[1][0]
        }
    }

    pub fn wins(&self) -> u64 {
        (0..2)
            .flat_map(|x| (0..2).map(move |y| (x, y)))
            .map(|(x, y)| self.setting_wins(x, y))
            .sum()
    }

    /// Text form: `x y a b count` per test cell and `gen a b count` per
    /// generation cell. Lines starting with `#` are comments.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# x y a b count\n");
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let _ = writeln!(s, "{x} {y} {a} {b} {}", self.test[x][y][a][b]);
                    }
                }
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                let _ = writeln!(s, "gen {a} {b} {}", self.generation[a][b]);
            }
        }
        s
    }

    /// Parses the text form. Missing cells are zero; repeated cells are an
    /// error.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut tally = TrialTally::default();
        let mut seen_test = [[[[false; 2]; 2]; 2]; 2];
        let mut seen_gen = [[false; 2]; 2];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |why: &str| Error::Tally(format!("line {}: {why}: {raw:?}", lineno + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bit = |s: &str| match s {
                "0" => Ok(0usize),
                "1" => Ok(1usize),
                _ => Err(bad("expected 0 or 1")),
            };
            let count = |s: &str| {
                s.parse::<u64>()
                    .map_err(|_| bad("count is not a non-negative integer"))
            };
            match fields.as_slice() {
                ["gen", a, b, c] => {
                    let (a, b) = (bit(a)?, bit(b)?);
                    if std::mem::replace(&mut seen_gen[a][b], true) {
                        return Err(bad("duplicate cell"));
                    }
                    tally.generation[a][b] = count(c)?;
                }
                [x, y, a, b, c] => {
                    let (x, y, a, b) = (bit(x)?, bit(y)?, bit(a)?, bit(b)?);
                    if std::mem::replace(&mut seen_test[x][y][a][b], true) {
                        return Err(bad("duplicate cell"));
                    }
                    tally.test[x][y][a][b] = count(c)?;
                }
                _ => return Err(bad("expected `x y a b count` or `gen a b count`")),
            }
        }
        Ok(tally)
    }
}

/// Average over the four settings of the per-setting win fraction.
pub fn chsh_score_from_counts(tally: &TrialTally) -> Result<f64> {
    let mut s = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let total = tally.setting_total(x, y);
            if total == 0 {
                return Err(Error::Tally(format!(
                    "no test rounds with x = {x}, y = {y}"
                )));
            }
            s += tally.setting_wins(x, y) as f64 / total as f64;
        }
    }
    Ok(s / 4.0)
}

/// Single-photon heralding efficiencies `(C / N_B, C / N_A)`.
pub fn heralding_efficiency(coincidences: u64, n_a: u64, n_b: u64) -> Result<(f64, f64)> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::invalid("singles counts must be positive"));
    }
    if coincidences > n_a.min(n_b) {
        return Err(Error::invalid("coincidences exceed singles"));
    }
    Ok((
        coincidences as f64 / n_b as f64,
        coincidences as f64 / n_a as f64,
    ))
}
