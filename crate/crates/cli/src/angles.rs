//! Angle lists such as `pi/2,pi/6`, `0.3,1.2`, `3*pi/8` or `all:pi/2`.

use std::f64::consts::PI;

use crate::CliError;

/// Parsed `--theta` value: an explicit list or one angle for every slot.
#[derive(Debug, Clone, PartialEq)]
pub enum AngleSpec {
    List(Vec<f64>),
    All(f64),
}

impl AngleSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("all:") {
            return Ok(Self::All(parse_angle(rest)?));
        }
        let list = s
            .split(',')
            .map(parse_angle)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::List(list))
    }

    /// Angles for `count` slots.
    pub fn expand(&self, count: usize) -> Result<Vec<f64>, CliError> {
        match self {
            Self::All(a) => Ok(vec![*a; count]),
            Self::List(v) if v.len() == count => Ok(v.clone()),
            Self::List(v) => Err(CliError::Usage(format!(
                "--theta has {} angles, expected {count}",
                v.len()
            ))),
        }
    }
}

/// One angle in radians: a float, or `[c*]pi[/q]`.
pub fn parse_angle(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let bad = || CliError::Usage(format!("cannot parse angle `{s}`"));
    let Some(pos) = s.find("pi") else {
        return s.parse::<f64>().map_err(|_| bad());
    };
    let (head, tail) = (&s[..pos], &s[pos + 2..]);
    let coef = match head {
        "" => 1.0,
        h => h
            .strip_suffix('*')
            .unwrap_or(h)
            .trim()
            .parse::<f64>()
            .map_err(|_| bad())?,
    };
    let den = match tail {
        "" => 1.0,
        t => t
            .strip_prefix('/')
            .ok_or_else(bad)?
            .trim()
            .parse::<f64>()
            .map_err(|_| bad())?,
    };
    let value = coef * PI / den;
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn literals() {
        assert_eq!(parse_angle("pi/2").unwrap(), FRAC_PI_2);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("3*pi/8").unwrap(), 3.0 * PI / 8.0);
        assert_eq!(parse_angle("2pi/8").unwrap(), 2.0 * PI / 8.0);
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert!(parse_angle("pi2").is_err());
        assert!(parse_angle("x").is_err());
        assert!(parse_angle("pi/0").is_err());
    }

    #[test]
    fn lists_and_broadcast() {
        let l = AngleSpec::parse("pi/6, pi/2").unwrap();
        assert_eq!(l.expand(2).unwrap(), vec![PI / 6.0, FRAC_PI_2]);
        assert!(l.expand(3).is_err());
        assert_eq!(
            AngleSpec::parse("all:pi/2").unwrap().expand(3).unwrap(),
            vec![FRAC_PI_2; 3]
        );
    }
}
