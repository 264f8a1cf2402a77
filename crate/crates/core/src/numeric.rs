//! Small numeric helpers shared across modules.

/// Logistic function evaluated on the branch that avoids overflow.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^t)` without overflow.
pub fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// `ln σ(z)`.
pub fn log_sigmoid(z: f64) -> f64 {
    -softplus(-z)
}

/// Splits a probability `p` of `a ≻ b` into an ordered pair `(P(a,b), P(b,a))`
/// whose sum is exactly `1.0` in floating point.
///
/// The larger side is computed directly and the smaller one as its complement;
/// `1 - p` is exact for `p >= 0.5`, so the two values always add to one.
pub fn complementary(p_major: f64) -> (f64, f64) {
    debug_assert!(p_major >= 0.5);
    (p_major, 1.0 - p_major)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// FNV-1a over the bit patterns of a slice of reals.
pub fn fnv1a_f64(values: &[f64]) -> u64 {
    let mut h = Fnv1a::new();
    for v in values {
        h.write_f64(*v);
    }
    h.finish()
}

#[derive(Debug, Clone, Copy)]
pub struct Fnv1a(u64);

impl Fnv1a {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;

    pub fn new() -> Self {
        Fnv1a(Self::OFFSET)
    }

    pub fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(Self::PRIME);
        }
    }

    pub fn write_u64(&mut self, v: u64) {
        self.write(&v.to_le_bytes());
    }

    pub fn write_f64(&mut self, v: f64) {
        self.write_u64(v.to_bits());
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}

/// Formats a real with 17 significant digits, `%.17g` style.
///
/// Seventeen digits round-trip every finite `f64`.
pub fn fmt_sig17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_fraction(format!("{:.*}", decimals, v))
    } else {
        let m = trim_fraction(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", m, sign, exp.abs())
    }
}

fn trim_fraction(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0');
    t.trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_matches_closed_form() {
        let e = std::f64::consts::E;
        assert!((sigmoid(1.0) - e / (e + 1.0)).abs() < 1e-15);
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert!(sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn log_sigmoid_is_stable() {
        assert!((log_sigmoid(0.0) + std::f64::consts::LN_2).abs() < 1e-15);
        assert!((log_sigmoid(-50.0) + 50.0).abs() < 1e-12);
        assert!(log_sigmoid(50.0).abs() < 1e-20);
    }

    #[test]
    fn sig17_round_trips() {
        for v in [
            0.1,
            1.0 / 3.0,
            -2.5e-9,
            123456789.123,
            7.0,
            1e300,
            std::f64::consts::PI,
        ] {
            let s = fmt_sig17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_sig17(0.5), "0.5");
        assert_eq!(fmt_sig17(2.0), "2");
        assert_eq!(fmt_sig17(0.0), "0");
        assert_eq!(fmt_sig17(1e-7), "9.9999999999999995e-08");
    }

    #[test]
    fn complementary_sums_to_one() {
        for p in [0.5, 0.5000000001, 0.73, 0.999999, 1.0] {
            let (a, b) = complementary(p);
            assert_eq!(a + b, 1.0);
        }
    }
}
