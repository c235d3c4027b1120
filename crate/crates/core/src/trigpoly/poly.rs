use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

/// `Σ_j c_j exp(i <n_j, θ>)` with integer frequency vectors `n_j`.
///
/// Terms sharing a frequency are merged and exact zeros dropped, so the
/// representation is canonical.
#[derive(Clone, PartialEq)]
pub struct TrigPoly {
    n_vars: usize,
    terms: BTreeMap<Vec<i64>, Complex64>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    re: f64,
    im: f64,
    freq: Vec<i64>,
}

impl TrigPoly {
    pub fn new(
        n_vars: usize,
        terms: impl IntoIterator<Item = (Complex64, Vec<i64>)>,
    ) -> Result<Self> {
        if n_vars == 0 {
            return Err(contract(
                "trigonometric polynomial needs at least one variable",
            ));
        }
        let mut map: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (c, freq) in terms {
            if freq.len() != n_vars {
                return Err(contract(format!(
                    "frequency {freq:?} has {} components, expected {n_vars}",
                    freq.len()
                )));
            }
            *map.entry(freq).or_default() += c;
        }
        map.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(Self { n_vars, terms: map })
    }

    /// Univariate polynomial from `(coefficient, frequency)` pairs.
    pub fn univariate(terms: impl IntoIterator<Item = (Complex64, i64)>) -> Self {
        Self::new(1, terms.into_iter().map(|(c, k)| (c, vec![k]))).expect("one variable")
    }

    pub fn zero(n_vars: usize) -> Self {
        Self {
            n_vars: n_vars.max(1),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, c: Complex64) -> Result<Self> {
        Self::new(n_vars, [(c, vec![0; n_vars])])
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(frequency, coefficient)` pairs in frequency order.
    pub fn terms(&self) -> impl Iterator<Item = (&[i64], Complex64)> {
        self.terms.iter().map(|(k, &c)| (k.as_slice(), c))
    }

    pub fn coefficient(&self, freq: &[i64]) -> Complex64 {
        self.terms.get(freq).copied().unwrap_or_default()
    }

    pub fn evaluate(&self, theta: &[f64]) -> Result<Complex64> {
        if theta.len() != self.n_vars {
            return Err(contract(format!(
                "evaluating a {}-variate polynomial at {} angles",
                self.n_vars,
                theta.len()
            )));
        }
        Ok(self.eval_unchecked(theta))
    }

    /// Univariate evaluation; panics on multivariate polynomials.
    pub fn eval1(&self, theta: f64) -> Complex64 {
        assert_eq!(self.n_vars, 1, "eval1 on a multivariate polynomial");
        self.eval_unchecked(&[theta])
    }

    fn eval_unchecked(&self, theta: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(freq, &c)| {
                let phase: f64 = freq.iter().zip(theta).map(|(&k, &t)| k as f64 * t).sum();
                c * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }

    /// Largest ℓ¹ norm of a frequency vector; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|k| k.iter().map(|x| x.unsigned_abs() as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// Degree counting only coefficients larger than `tol` in modulus.
    pub fn effective_degree(&self, tol: f64) -> usize {
        self.pruned(tol).degree()
    }

    /// Drop coefficients with modulus at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(k, &c)| (k.clone(), c))
            .collect();
        Self {
            n_vars: self.n_vars,
            terms,
        }
    }

    /// `d/dθ`, univariate only.
    pub fn derivative(&self) -> Result<Self> {
        if self.n_vars != 1 {
            return Err(contract("derivative is defined for univariate polynomials"));
        }
        Self::new(
            1,
            self.terms
                .iter()
                .map(|(k, &c)| (c * Complex64::new(0.0, k[0] as f64), k.clone())),
        )
    }

    /// Pointwise complex conjugate: conjugated coefficients, negated frequencies.
    pub fn conj(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| (k.iter().map(|x| -x).collect(), c.conj()))
            .collect();
        Self {
            n_vars: self.n_vars,
            terms,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_vars(other)?;
        Self::new(
            self.n_vars,
            self.terms
                .iter()
                .chain(&other.terms)
                .map(|(k, &c)| (c, k.clone())),
        )
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_vars(other)?;
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ka, &ca) in &self.terms {
            for (kb, &cb) in &other.terms {
                out.push((ca * cb, ka.iter().zip(kb).map(|(a, b)| a + b).collect()));
            }
        }
        Self::new(self.n_vars, out)
    }

    /// `|T|²` as a polynomial.
    pub fn norm_sqr(&self) -> Self {
        self.mul(&self.conj()).expect("same variable count")
    }

    fn same_vars(&self, other: &Self) -> Result<()> {
        if self.n_vars != other.n_vars {
            return Err(contract(format!(
                "mixing {}-variate and {}-variate polynomials",
                self.n_vars, other.n_vars
            )));
        }
        Ok(())
    }

    /// JSON list of `{re, im, freq}` terms.
    pub fn to_json(&self) -> String {
        let terms: Vec<TermJson> = self
            .terms
            .iter()
            .map(|(k, c)| TermJson {
                re: c.re,
                im: c.im,
                freq: k.clone(),
            })
            .collect();
        serde_json::to_string(&terms).expect("terms serialize")
    }

    /// Parse a JSON term list. An empty list is the univariate zero polynomial.
    pub fn from_json(text: &str) -> Result<Self> {
        let terms: Vec<TermJson> = serde_json::from_str(text)?;
        let n_vars = terms.first().map_or(1, |t| t.freq.len());
        Self::new(
            n_vars,
            terms
                .into_iter()
                .map(|t| (Complex64::new(t.re, t.im), t.freq)),
        )
    }
}

impl fmt::Debug for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn cosine() -> TrigPoly {
        TrigPoly::univariate([(c(0.5), 1), (c(0.5), -1)])
    }

    #[test]
    fn evaluate_examples() {
        let k = TrigPoly::constant(2, Complex64::new(0.3, -1.0)).unwrap();
        assert_eq!(k.evaluate(&[1.0, 2.0]).unwrap(), Complex64::new(0.3, -1.0));
        assert!((cosine().eval1(0.0) - c(1.0)).norm() < 1e-15);
        let t = TrigPoly::new(2, [(c(1.0), vec![2, -3])]).unwrap();
        assert!((t.evaluate(&[PI, 0.0]).unwrap() - c(1.0)).norm() < 1e-14);
        assert!(t.evaluate(&[0.0]).is_err());
    }

    #[test]
    fn degree_examples() {
        assert_eq!(TrigPoly::constant(1, c(2.0)).unwrap().degree(), 0);
        assert_eq!(
            TrigPoly::new(2, [(c(1.0), vec![2, -3])]).unwrap().degree(),
            5
        );
        assert_eq!(cosine().degree(), 1);
    }

    #[test]
    fn merging_is_canonical() {
        let t = TrigPoly::univariate([(c(1.0), 2), (c(-1.0), 2), (c(3.0), 0)]);
        assert_eq!(t.len(), 1);
        assert_eq!(t.degree(), 0);
    }

    #[test]
    fn derivative_examples() {
        assert!(TrigPoly::constant(1, c(4.0))
            .unwrap()
            .derivative()
            .unwrap()
            .is_zero());
        let d = cosine().derivative().unwrap();
        for i in 0..64 {
            let th = 2.0 * PI * i as f64 / 64.0;
            assert!((d.eval1(th) - c(-th.sin())).norm() <= 1e-12);
        }
        assert!(d.degree() <= cosine().degree());
        assert!(TrigPoly::constant(2, c(1.0)).unwrap().derivative().is_err());
    }

    #[test]
    fn square_of_sine() {
        // sin θ = (e^{iθ} - e^{-iθ}) / 2i, |sin θ|² = ½ - ¼e^{2iθ} - ¼e^{-2iθ}
        let s = TrigPoly::univariate([
            (Complex64::new(0.0, -0.5), 1),
            (Complex64::new(0.0, 0.5), -1),
        ]);
        let sq = s.norm_sqr();
        assert_eq!(sq.degree(), 2);
        assert!((sq.coefficient(&[0]) - c(0.5)).norm() < 1e-15);
        assert!((sq.coefficient(&[2]) - c(-0.25)).norm() < 1e-15);
    }

    #[test]
    fn json_shape() {
        let t = TrigPoly::new(2, [(Complex64::new(1.0, -2.0), vec![1, -1])]).unwrap();
        let text = t.to_json();
        assert_eq!(text, r#"[{"re":1.0,"im":-2.0,"freq":[1,-1]}]"#);
        assert_eq!(TrigPoly::from_json(&text).unwrap(), t);
        assert!(TrigPoly::from_json(
            r#"[{"re":1,"im":0,"freq":[1]},{"re":1,"im":0,"freq":[1,2]}]"#
        )
        .is_err());
    }
}
