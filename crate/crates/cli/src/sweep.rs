use std::str::FromStr;

const MAX_POINTS: usize = 1_000_000;

/// A single value or an inclusive `min:max:step` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> Result<f64, String> {
            let v: f64 = t
                .trim()
                .parse()
                .map_err(|_| format!("not a number: {t:?}"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("not finite: {t:?}"))
            }
        };
        match parts.as_slice() {
            [v] => Ok(Sweep {
                values: vec![num(v)?],
            }),
            [a, b, h] => {
                let (min, max, step) = (num(a)?, num(b)?, num(h)?);
                if step <= 0.0 {
                    return Err(format!("step must be positive, got {step}"));
                }
                if min > max {
                    return Err(format!("empty sweep {min}:{max}"));
                }
                let span = (max - min) / step + 0.5;
                if span >= MAX_POINTS as f64 {
                    return Err(format!("sweep has more than {MAX_POINTS} points"));
                }
                let count = span.floor() as usize + 1;
                let values = (0..count)
                    .map(|i| {
                        let v = min + i as f64 * step;
                        // land exactly on zero when the grid passes through it
                        if v.abs() < 1e-9 * step {
                            0.0
                        } else {
                            v
                        }
                    })
                    .collect();
                Ok(Sweep { values })
            }
            _ => Err(format!("expected a value or min:max:step, got {s:?}")),
        }
    }
}

/// Inclusive integer range `a:b`.
pub fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected a:b, got {s:?}"))?;
    let a: i64 = a
        .trim()
        .parse()
        .map_err(|_| format!("not an integer: {a:?}"))?;
    let b: i64 = b
        .trim()
        .parse()
        .map_err(|_| format!("not an integer: {b:?}"))?;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value() {
        assert_eq!("0.5".parse::<Sweep>().unwrap().values, vec![0.5]);
        assert_eq!("-2".parse::<Sweep>().unwrap().values, vec![-2.0]);
    }

    #[test]
    fn grid_includes_endpoints_and_zero() {
        let s: Sweep = "-2:2:0.01".parse().unwrap();
        assert_eq!(s.values.len(), 401);
        assert_eq!(s.values[200], 0.0);
        assert!((s.values[400] - 2.0).abs() < 1e-12);
        let s: Sweep = "0:1:0.3".parse().unwrap();
        assert_eq!(s.values.len(), 4);
    }

    #[test]
    fn rejects_bad_grids() {
        for bad in ["1:0:0.1", "0:1:0", "0:1", "a", "0:1:-1", "nan"] {
            assert!(bad.parse::<Sweep>().is_err(), "{bad}");
        }
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-10:10").unwrap(), (-10, 10));
        assert!(parse_range("3").is_err());
    }
}
