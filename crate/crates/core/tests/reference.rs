//! Cross-checks against independent, deliberately naive computations.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use qquery_core::experiments::{
    evaluation_phase_algorithm, grover_iterate_dense, run_algorithm, AlgorithmBuilder, QueryConfig,
    QuerySlot,
};
use qquery_core::linalg::{
    apply_raw, embed, random_unitary, spectral_norm, tensor_product, Complex64, DenseMap,
    DifferenceMap, Layout, LinearMap, Operator, StateVector,
};
use qquery_core::oracles::{
    build_bit_query, build_phase_query, BitEncoding, OracleFunction, PhaseEncoding,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Mat = Vec<Vec<Complex64>>;

fn columns(op: &dyn LinearMap) -> Mat {
    // Column j is op applied to e_j.
    (0..op.dim_in())
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); op.dim_in()];
            e[j] = Complex64::new(1.0, 0.0);
            apply_raw(op, &e).unwrap()
        })
        .collect()
}

fn matvec(cols: &Mat, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); cols[0].len()];
    for (c, x) in cols.iter().zip(v) {
        for (o, a) in out.iter_mut().zip(c) {
            *o += a * x;
        }
    }
    out
}

fn adj_matvec(cols: &Mat, v: &[Complex64]) -> Vec<Complex64> {
    cols.iter()
        .map(|c| c.iter().zip(v).map(|(a, x)| a.conj() * x).sum())
        .collect()
}

/// Largest singular value by power iteration on `A†A`.
fn power_norm(op: &dyn LinearMap) -> f64 {
    let cols = columns(op);
    let n = op.dim_in();
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.3 - 0.05 * i as f64))
        .collect();
    let mut lambda = 0.0;
    for _ in 0..20_000 {
        let w = adj_matvec(&cols, &matvec(&cols, &v));
        let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = w.into_iter().map(|x| x / norm).collect();
        if (norm - lambda).abs() < 1e-15 * norm {
            lambda = norm;
            break;
        }
        lambda = norm;
    }
    lambda.sqrt()
}

#[test]
fn spectral_norm_matches_power_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dim in [2, 4, 8, 16] {
        let a: Operator = Arc::new(random_unitary(dim, &mut rng).unwrap());
        let b: Operator = Arc::new(random_unitary(dim, &mut rng).unwrap());
        let diff = DifferenceMap::new(a, b).unwrap();
        let s = spectral_norm(&diff).unwrap();
        let p = power_norm(&diff);
        assert!((s - p).abs() < 1e-6, "dim {dim}: {s} vs {p}");
    }
}

#[test]
fn phase_query_difference_matches_power_iteration() {
    let f1 = OracleFunction::new(vec![0.5, 0.1, 0.9, 0.3]).unwrap();
    let f2 = OracleFunction::new(vec![0.45, 0.1, 0.7, 0.35]).unwrap();
    let diff = DifferenceMap::new(
        build_phase_query(&f1, PhaseEncoding::Identity).unwrap(),
        build_phase_query(&f2, PhaseEncoding::Identity).unwrap(),
    )
    .unwrap();
    assert!((spectral_norm(&diff).unwrap() - power_norm(&diff)).abs() < 1e-8);
}

#[test]
fn tensor_product_matches_kronecker() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a: Operator = Arc::new(random_unitary(2, &mut rng).unwrap());
    let b: Operator = Arc::new(random_unitary(4, &mut rng).unwrap());
    let (ca, cb) = (columns(a.as_ref()), columns(b.as_ref()));
    let t = tensor_product(a, b).unwrap();
    let ct = columns(t.as_ref());
    for i in 0..8 {
        for j in 0..8 {
            let want = ca[j / 4][i / 4] * cb[j % 4][i % 4];
            assert!((ct[j][i] - want).norm() < 1e-14);
        }
    }
}

#[test]
fn embedded_bit_query_acts_on_chosen_registers() {
    // [value 2, pad 1, index 1]: bit query on (index, value).
    let f = OracleFunction::new(vec![0.3, 0.8]).unwrap();
    let enc = BitEncoding::floor_midpoint(2).unwrap();
    let layout = Layout::new(vec![2, 1, 1]).unwrap();
    let op = embed(&layout, &[2, 0], build_bit_query(&f, &enc).unwrap()).unwrap();
    let codes = [1usize, 3usize];
    for x in 0..4usize {
        for p in 0..2usize {
            for (j, code) in codes.iter().enumerate() {
                let i = (x << 2) | (p << 1) | j;
                let out = apply_raw(
                    op.as_ref(),
                    StateVector::basis(layout.clone(), i).unwrap().amplitudes(),
                )
                .unwrap();
                let want = (((x + code) % 4) << 2) | (p << 1) | j;
                assert!((out[want] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
    }
}

#[test]
fn two_qubit_hand_computation() {
    // H on the index then Q_f with f = (1/4, 3/4): θ = π/6, π/3.
    // |00> -> (cos(π/6)|00> + sin(π/6)|01> + cos(π/3)|10> + sin(π/3)|11>)/√2.
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let h: Operator =
        Arc::new(DenseMap::new(nalgebra::DMatrix::from_row_slice(2, 2, &[s, s, s, -s])).unwrap());
    let layout = Layout::new(vec![1, 1]).unwrap();
    let spec = AlgorithmBuilder::new(layout.clone())
        .unitary_on(&[0], h)
        .unwrap()
        .query(QuerySlot::phase(0, 1))
        .build(StateVector::basis(layout, 0).unwrap(), vec![0.0; 4])
        .unwrap();
    let f = OracleFunction::new(vec![0.25, 0.75]).unwrap();
    let out = run_algorithm(&spec, &f, &QueryConfig::default()).unwrap();
    let r = FRAC_1_SQRT_2;
    let want = [0.75f64.sqrt() * r, 0.5 * r, 0.5 * r, 0.75f64.sqrt() * r];
    for (a, w) in out.amplitudes().iter().zip(want) {
        assert!((a - Complex64::new(w, 0.0)).norm() < 1e-14);
    }
}

#[test]
fn estimator_distribution_matches_textbook_formula() {
    // After phase estimation of e^{±2iθ}, outcome y has probability
    // ½ (K(y - Mθ/π) + K(y + Mθ/π)) with K(δ) = sin²(πδ) / (M² sin²(πδ/M)).
    let t = 4u32;
    let m = 16.0f64;
    let spec = evaluation_phase_algorithm(t).unwrap();
    for v in [0.1f64, 0.3, 0.62, 0.9] {
        let f = OracleFunction::new(vec![v]).unwrap();
        let probs = run_algorithm(&spec, &f, &QueryConfig::default())
            .unwrap()
            .probabilities();
        let w = m * v.sqrt().asin() / std::f64::consts::PI;
        let k = |d: f64| {
            let den = (std::f64::consts::PI * d / m).sin();
            if den.abs() < 1e-12 {
                1.0
            } else {
                (std::f64::consts::PI * d).sin().powi(2) / (m * m * den * den)
            }
        };
        for y in 0..16usize {
            let p = probs[y << 1] + probs[(y << 1) | 1];
            let want = 0.5 * (k(y as f64 - w) + k(y as f64 + w));
            assert!((p - want).abs() < 1e-10, "v={v} y={y}: {p} vs {want}");
        }
    }
}

#[test]
fn grover_iterate_for_uniform_prep() {
    // With |ψ> = Q (H ⊗ I)|00> and a = mean sin²θ_j, <ψ|G|ψ> = cos 2θ where sin²θ = a.
    let f = OracleFunction::new(vec![0.2, 0.6]).unwrap();
    let g = grover_iterate_dense(&f).unwrap();
    let r = FRAC_1_SQRT_2;
    let psi = [
        r * 0.8f64.sqrt(),
        r * 0.2f64.sqrt(),
        r * 0.4f64.sqrt(),
        r * 0.6f64.sqrt(),
    ];
    let mut overlap = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            overlap += psi[i] * g[(i, j)] * psi[j];
        }
    }
    let theta = 0.4f64.sqrt().asin();
    assert!(
        (overlap - Complex64::new((2.0 * theta).cos(), 0.0)).norm() < 1e-12,
        "{overlap}"
    );
}
