//! Grid specifications: `a:b:steps[:lin|:log]` or a comma-separated list.

use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let points = match parts.as_slice() {
            [a, b, steps] | [a, b, steps, _] => {
                let scale = parts.get(3).copied().unwrap_or("lin");
                let a: f64 = number(a)?;
                let b: f64 = number(b)?;
                let steps: usize = steps
                    .trim()
                    .parse()
                    .map_err(|_| format!("invalid step count {steps:?}"))?;
                range(a, b, steps, scale)?
            }
            [list] => list
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(number)
                .collect::<Result<_, _>>()?,
            _ => {
                return Err(format!(
                    "invalid grid {s:?}, expected a:b:steps[:lin|:log] or a list"
                ))
            }
        };
        if points.is_empty() {
            return Err("grid is empty".into());
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err("grid values must be finite".into());
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err("grid must be strictly increasing".into());
        }
        Ok(Grid(points))
    }
}

fn number(t: &str) -> Result<f64, String> {
    t.trim()
        .parse()
        .map_err(|_| format!("invalid number {t:?}"))
}

fn range(a: f64, b: f64, steps: usize, scale: &str) -> Result<Vec<f64>, String> {
    if steps == 0 {
        return Ok(Vec::new());
    }
    if steps == 1 {
        return Ok(vec![a]);
    }
    let t = |k: usize| k as f64 / (steps - 1) as f64;
    match scale {
        "lin" => Ok((0..steps)
            .map(|k| {
                if k == steps - 1 {
                    b
                } else {
                    a + (b - a) * t(k)
                }
            })
            .collect()),
        "log" => {
            if !(a > 0.0 && b > 0.0) {
                return Err("log grids need positive end points".into());
            }
            let (la, lb) = (a.ln(), b.ln());
            Ok((0..steps)
                .map(|k| match k {
                    0 => a,
                    k if k == steps - 1 => b,
                    k => (la + (lb - la) * t(k)).exp(),
                })
                .collect())
        }
        other => Err(format!("unknown grid scale {other:?}, expected lin or log")),
    }
}
