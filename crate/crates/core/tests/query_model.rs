use num_complex::Complex64;
use qmlint::query::{MeasuredAlgorithm, NoMeasureAlgorithm, OracleFunction, QuerySpec, QueryTally};
use qmlint::statevec::{OutcomeDistribution, Register};
use qmlint::{StateVec, Unitary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Matrix = Vec<Vec<Complex64>>;

fn random_su2(rng: &mut impl Rng, target: usize) -> Unitary {
    let (t, a, b): (f64, f64, f64) = (rng.gen_range(0.0..6.3), rng.gen_range(0.0..6.3), rng.gen_range(0.0..6.3));
    let e = |x: f64| Complex64::from_polar(1.0, x);
    Unitary::dense(vec![target], vec![e(a) * t.cos(), -e(-b) * t.sin(), e(b) * t.sin(), e(-a) * t.cos()])
}

fn random_layer(rng: &mut impl Rng, m: usize) -> Vec<Unitary> {
    (0..3)
        .map(|_| match rng.gen_range(0..4) {
            0 => {
                let target = rng.gen_range(0..m);
                random_su2(rng, target)
            }
            1 => {
                let w = rng.gen_range(1..=m);
                let start = rng.gen_range(0..=m - w);
                Unitary::hadamard(Register::new(start, w))
            }
            2 => {
                let mask = rng.gen_range(1..1usize << m);
                let angle = rng.gen_range(0.0..6.3);
                Unitary::phase(move |b| b & mask == mask, angle)
            }
            _ => Unitary::qft(Register::new(0, m)),
        })
        .collect()
}

fn matrix_of(u: &[Unitary], m: usize) -> Matrix {
    let dim = 1 << m;
    let mut cols = Vec::with_capacity(dim);
    for b in 0..dim {
        let mut psi = StateVec::basis_state(m, b).unwrap();
        psi.apply_all(u).unwrap();
        cols.push(psi.amplitudes().to_vec());
    }
    (0..dim).map(|r| (0..dim).map(|c| cols[c][r]).collect()).collect()
}

fn query_matrix(spec: &QuerySpec<usize, u64>, table: &[u64]) -> Matrix {
    let (m, idx, val) = (spec.qubits(), spec.index_bits(), spec.value_bits());
    let dim = 1 << m;
    let mut out = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    let shift = m - idx - val;
    let vmask = (1usize << val) - 1;
    for b in 0..dim {
        let i = b >> (m - idx);
        let target = if spec.contains(i) {
            let x = (b >> shift) & vmask;
            let nx = (x + table[i] as usize) & vmask;
            (b & !(vmask << shift)) | (nx << shift)
        } else {
            b
        };
        out[target][b] = Complex64::new(1.0, 0.0);
    }
    out
}

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n).map(|r| (0..n).map(|c| (0..n).map(|k| a[r][k] * b[k][c]).sum()).collect()).collect()
}

#[test]
fn query_adds_into_value_register() {
    // m=3, m'=1, m''=2, Z={1}, β(f(τ(1))) = 2
    let spec = QuerySpec::new(3, 1, 2, [1], |i| i, |k: &u64| *k).unwrap();
    let f = OracleFunction::new(|_: &usize| 2u64);
    let psi = StateVec::basis_state(3, 0b101).unwrap();
    let out = spec.apply(&f, &psi, &mut QueryTally::default()).unwrap();
    assert_eq!(out.probability(0b111), 1.0);
    // i = 0 is outside Z
    let psi = StateVec::basis_state(3, 0b001).unwrap();
    let out = spec.apply(&f, &psi, &mut QueryTally::default()).unwrap();
    assert_eq!(out.probability(0b001), 1.0);
}

#[test]
fn no_measure_run_equals_dense_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let m = rng.gen_range(3..=6);
        let idx = rng.gen_range(1..m);
        let val = rng.gen_range(1..=m - idx);
        let z: Vec<usize> = (0..1usize << idx).filter(|_| rng.gen_bool(0.7)).chain([0]).collect();
        let table: Vec<u64> = (0..1 << idx).map(|_| rng.gen_range(0..64)).collect();
        let spec = QuerySpec::new(m, idx, val, z, |i| i, |k: &u64| *k).unwrap();
        let nq = rng.gen_range(0..=3);
        let layers: Vec<Vec<Unitary>> = (0..=nq).map(|_| random_layer(&mut rng, m)).collect();
        let alg = NoMeasureAlgorithm::new(spec.clone(), layers.clone()).unwrap();
        let t = table.clone();
        let f = OracleFunction::new(move |i: &usize| t[*i]);

        let q = query_matrix(&spec, &table);
        let mut total = matrix_of(&layers[0], m);
        for layer in &layers[1..] {
            total = matmul(&matrix_of(layer, m), &matmul(&q, &total));
        }
        let b0 = rng.gen_range(0..1usize << m);
        let mut tally = QueryTally::default();
        let out = alg.run(&f, b0, &mut tally).unwrap();
        for (r, row) in total.iter().enumerate() {
            assert!((out.amplitude(r) - row[b0]).norm() < 1e-12, "m={m} nq={nq} row {r}");
        }
        assert_eq!(tally.queries, nq as u64);
    }
}

#[test]
fn two_stage_sampling_matches_exact_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let m = 4;
    let spec = QuerySpec::new(m, 2, 2, [0, 2, 3], |i| i, |k: &u64| *k).unwrap();
    let stage = |rng: &mut ChaCha8Rng| NoMeasureAlgorithm::new(spec.clone(), vec![random_layer(rng, m), random_layer(rng, m)]).unwrap();
    let stages = vec![stage(&mut rng), stage(&mut rng)];
    let alg = MeasuredAlgorithm::staged(stages, |l, xs: &[usize]| if l == 0 { 5 } else { xs[0] ^ 0b1010 }, |xs| ((xs[0] >> 2) * 4 + (xs[1] >> 2)) as f64)
        .unwrap();
    let f = OracleFunction::new(|i: &usize| [1u64, 3, 2, 0][*i]);
    // output reads the index registers of both stages
    let exact = alg.exact_output_distribution(&f, 1 << 12).unwrap();
    let runs = 100_000;
    let mut counts = OutcomeDistribution::new();
    let mut tally = QueryTally::default();
    for _ in 0..runs {
        counts.add(alg.run(&f, &mut rng, &mut tally).unwrap(), 1.0 / runs as f64);
    }
    let tv = counts.tv_distance(&exact);
    assert!(tv < 0.01, "TV {tv}");
    assert_eq!(tally.queries, 2 * runs);
}

#[test]
fn median_boost_failure_rate() {
    // one qubit, outcome 1 with probability 3/4
    let (c, s) = (0.25f64.sqrt(), 0.75f64.sqrt());
    let rot = Unitary::dense(vec![0], [c, -s, s, c].map(|x| Complex64::new(x, 0.0)).to_vec());
    let spec = QuerySpec::new(1, 0, 1, [0], |i| i, |k: &u64| *k).unwrap();
    let stage = NoMeasureAlgorithm::new(spec, vec![vec![rot]]).unwrap();
    let base = MeasuredAlgorithm::single(stage, 0, |x| x as f64).unwrap();
    let boosted = base.median_boost(24).unwrap();
    assert_eq!(boosted.n_queries(), 0);
    let f = OracleFunction::new(|_: &usize| 0u64);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let trials = 100_000;
    let mut tally = QueryTally::default();
    let failures = (0..trials).filter(|_| boosted.run(&f, &mut rng, &mut tally).unwrap() != 1.0).count();
    let rate = failures as f64 / trials as f64;
    assert!(rate <= 0.06, "failure rate {rate}");
    assert!(rate <= (-3.0f64).exp() + 0.02);
}
