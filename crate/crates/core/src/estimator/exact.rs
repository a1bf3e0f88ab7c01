//! Exact floating-point summation. Every f64 is added into a fixed-point
//! integer register wide enough to hold any finite double, so sums are
//! independent of the order and grouping of their terms.

const LIMB_BITS: u32 = 32;
const LIMBS: usize = 67;
const LIMB_MASK: i64 = (1 << LIMB_BITS) - 1;
// each limb absorbs < 2^33 per add; renormalize well before i64 overflow
const MAX_PENDING: u32 = 1 << 29;

#[derive(Clone, PartialEq, Eq)]
pub struct ExactSum {
    limbs: Box<[i64; LIMBS]>,
    pending: u32,
    // inf/nan terms, which have no fixed-point image
    special: Option<u64>,
}

impl Default for ExactSum {
    fn default() -> Self {
        ExactSum { limbs: Box::new([0; LIMBS]), pending: 0, special: None }
    }
}

impl std::fmt::Debug for ExactSum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ExactSum({})", self.value())
    }
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        if x == 0.0 {
            return;
        }
        if !x.is_finite() {
            let prev = self.special.map_or(0.0, f64::from_bits);
            self.special = Some((prev + x).to_bits());
            return;
        }
        let bits = x.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as u32;
        let mut mant = bits & ((1u64 << 52) - 1);
        // bit position of the mantissa's least significant bit, counted
        // from 2^-1074
        let pos = if biased == 0 {
            0
        } else {
            mant |= 1u64 << 52;
            biased - 1
        };
        let idx = (pos / LIMB_BITS) as usize;
        let wide = (mant as u128) << (pos % LIMB_BITS);
        let sign = if x < 0.0 { -1 } else { 1 };
        for k in 0..3 {
            let chunk = ((wide >> (k * LIMB_BITS)) as i64) & LIMB_MASK;
            if chunk != 0 {
                self.limbs[idx + k as usize] += sign * chunk;
            }
        }
        self.pending += 1;
        if self.pending >= MAX_PENDING {
            self.normalize();
        }
    }

    /// Adds `a * b` exactly.
    pub fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        self.add(p);
        if p.is_finite() {
            self.add(a.mul_add(b, -p));
        }
    }

    pub fn merge(&mut self, other: &ExactSum) {
        if other.pending.saturating_add(self.pending) >= MAX_PENDING {
            self.normalize();
        }
        for (a, b) in self.limbs.iter_mut().zip(other.limbs.iter()) {
            *a += *b;
        }
        self.pending += other.pending.max(1);
        if let Some(s) = other.special {
            let prev = self.special.map_or(0.0, f64::from_bits);
            self.special = Some((prev + f64::from_bits(s)).to_bits());
        }
    }

    fn normalize(&mut self) {
        let mut carry = 0i64;
        for limb in self.limbs[..LIMBS - 1].iter_mut() {
            let v = *limb + carry;
            carry = v >> LIMB_BITS;
            *limb = v & LIMB_MASK;
        }
        self.limbs[LIMBS - 1] += carry;
        self.pending = 0;
    }

    /// Sum rounded to the nearest double (ties away from a sticky tail are
    /// resolved by round-to-nearest-even on the leading 96 bits).
    pub fn value(&self) -> f64 {
        if let Some(s) = self.special {
            return f64::from_bits(s);
        }
        let mut c = self.clone();
        c.normalize();
        // after normalization every limb except the top one lies in
        // [0, 2^32); the sign lives in the top limb
        let negative = c.limbs[LIMBS - 1] < 0;
        if negative {
            for limb in c.limbs.iter_mut() {
                *limb = -*limb;
            }
            c.normalize();
        }
        let mag: Vec<u64> = c.limbs.iter().map(|&l| l as u64).collect();
        let Some(top) = (0..LIMBS).rev().find(|&k| mag[k] != 0) else {
            return 0.0;
        };
        let lo = top.saturating_sub(2);
        let mut head: u128 = 0;
        for k in (lo..=top).rev() {
            head = (head << LIMB_BITS) | mag[k] as u128;
        }
        if mag[..lo].iter().any(|&m| m != 0) {
            head |= 1;
        }
        let shift = (lo as i32) * LIMB_BITS as i32 - 1074;
        let v = scale(head as f64, shift);
        if negative {
            -v
        } else {
            v
        }
    }
}

fn scale(x: f64, mut e: i32) -> f64 {
    let mut x = x;
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e)
}

/// First and second moments of a scalar sample, both exact.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Moments {
    pub sum: ExactSum,
    pub sum_sq: ExactSum,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.sum.add(x);
        self.sum_sq.add_product(x, x);
    }

    pub fn merge(&mut self, other: &Moments) {
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
    }

    pub fn mean(&self, n: u64) -> f64 {
        self.sum.value() / n as f64
    }

    /// Unbiased sample variance of `n` observations (unrecorded ones are 0).
    pub fn variance(&self, n: u64) -> f64 {
        let nf = n as f64;
        let m = self.mean(n);
        // sum (x - m)^2 = S2 - 2 m S1 + n m^2, with S1 split as hi + lo
        let mut acc = self.sum_sq.clone();
        let s1_hi = self.sum.value();
        let mut rest = self.sum.clone();
        rest.add(-s1_hi);
        let s1_lo = rest.value();
        acc.add_product(-2.0 * m, s1_hi);
        acc.add(-2.0 * m * s1_lo);
        let m2 = m * m;
        let m2_err = m.mul_add(m, -m2);
        acc.add_product(nf, m2);
        acc.add(nf * m2_err);
        (acc.value() / (nf - 1.0)).max(0.0)
    }
}
