use std::cmp::Ordering;
use std::fmt::Write as _;

pub type Exp = u16;

/// Exponent vector. Ordered by total degree first, then so that earlier
/// variables come first (`x^2 < x*y < y^2`), the usual local degree order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Box<[Exp]>);

impl Monomial {
    pub fn new(exps: Vec<Exp>) -> Self {
        Monomial(exps.into_boxed_slice())
    }

    pub fn from_slice(exps: &[Exp]) -> Self {
        Monomial(exps.into())
    }

    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n].into_boxed_slice())
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial::new(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn exps(&self) -> &[Exp] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn weighted_degree(&self, w: &[i64]) -> i64 {
        self.0.iter().zip(w).map(|(&e, &wi)| e as i64 * wi).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.nvars(), other.nvars());
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self`, if it exists.
    pub fn divide_into(&self, other: &Monomial) -> Option<Monomial> {
        if !self.divides(other) {
            return None;
        }
        Some(Monomial(other.0.iter().zip(self.0.iter()).map(|(b, a)| b - a).collect()))
    }

    /// Derivative in variable `i`: the multiplier and the lowered monomial.
    pub fn derive(&self, i: usize) -> Option<(Exp, Monomial)> {
        let e = self.0[i];
        if e == 0 {
            return None;
        }
        let mut v = self.0.to_vec();
        v[i] -= 1;
        Some((e, Monomial::new(v)))
    }

    pub fn format(&self, names: &[String]) -> String {
        let mut s = String::new();
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !s.is_empty() {
                s.push('*');
            }
            s.push_str(&names[i]);
            if e > 1 {
                let _ = write!(s, "^{e}");
            }
        }
        if s.is_empty() {
            s.push('1');
        }
        s
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        for (a, b) in self.0.iter().zip(other.0.iter()).rev() {
            if a != b {
                // More weight on later variables sorts later.
                return a.cmp(b);
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials of total degree `d` in `n` variables, in monomial order.
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0 as Exp; n];
    fn rec(i: usize, left: u32, cur: &mut Vec<Exp>, out: &mut Vec<Monomial>) {
        let n = cur.len();
        if i + 1 == n {
            cur[i] = left as Exp;
            out.push(Monomial::from_slice(cur));
            cur[i] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e as Exp;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    if n == 0 {
        if d == 0 {
            out.push(Monomial::one(0));
        }
        return out;
    }
    rec(0, d, &mut cur, &mut out);
    out.sort();
    out
}

/// Monomials with `lo <= degree <= hi`, ascending.
pub fn monomials_in_range(n: usize, lo: u32, hi: u32) -> Vec<Monomial> {
    (lo..=hi).flat_map(|d| monomials_of_degree(n, d)).collect()
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r = 1u64;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_degree_order() {
        let x2 = Monomial::new(vec![2, 0]);
        let xy = Monomial::new(vec![1, 1]);
        let y2 = Monomial::new(vec![0, 2]);
        let x = Monomial::new(vec![1, 0]);
        assert!(x < y2 && x2 < xy && xy < y2);
        assert_eq!(monomials_of_degree(2, 2), vec![x2, xy, y2]);
    }

    #[test]
    fn counts() {
        for n in 1..5 {
            for d in 0..6 {
                assert_eq!(
                    monomials_of_degree(n, d).len() as u64,
                    binomial((n as u64) + d as u64 - 1, d as u64)
                );
            }
        }
    }

    #[test]
    fn grevlex_tie_break() {
        // x*z^2 vs y^3: the one with more z is later.
        let a = Monomial::new(vec![1, 0, 2]);
        let b = Monomial::new(vec![0, 3, 0]);
        assert!(b < a);
    }
}
