use std::fmt;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

/// Exact fraction; serialized as `{"exact": "3/4", "value": 0.75}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fraction(pub Ratio<i64>);

impl Fraction {
    pub fn new(num: i64, den: i64) -> Self {
        Fraction(Ratio::new(num, den))
    }

    /// `k / n`, or zero when `n` is zero.
    pub fn of(k: usize, n: usize) -> Self {
        if n == 0 {
            Fraction(Ratio::zero())
        } else {
            Fraction::new(k as i64, n as i64)
        }
    }

    pub fn zero() -> Self {
        Fraction(Ratio::zero())
    }

    pub fn one() -> Self {
        Fraction::new(1, 1)
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Arithmetic mean; zero for an empty list.
    pub fn mean(values: &[Fraction]) -> Fraction {
        if values.is_empty() {
            return Fraction::zero();
        }
        let sum = values.iter().fold(Ratio::zero(), |acc, v| acc + v.0);
        Fraction(sum / values.len() as i64)
    }
}

impl From<Ratio<i64>> for Fraction {
    fn from(r: Ratio<i64>) -> Self {
        Fraction(r)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Fraction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Fraction", 2)?;
        st.serialize_field("exact", &self.0.to_string())?;
        st.serialize_field("value", &self.to_f64())?;
        st.end()
    }
}
