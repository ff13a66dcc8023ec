use approx::assert_relative_eq;
use dirne_core::entropy::{ProtocolParams, ThresholdRule};
use dirne_core::error_budget::{extractor_error, output_length, ErrorBudget};
use dirne_core::extractor::*;
use dirne_core::optimizer::outer_optimize;
use dirne_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bits(v: &[u8]) -> Bits {
    Bits::from_bools(&v.iter().map(|&b| b == 1).collect::<Vec<_>>())
}

/// Builds the matrix entry by entry from the first column and first row.
fn explicit_matrix(seed: &[u8], m: usize, n: usize) -> Vec<Vec<u8>> {
    // seed = (a_{-(n-1)}, ..., a_{m-1}); entry (i, j) = a_{i-j}
    (0..m)
        .map(|i| (0..n).map(|j| seed[(n - 1 + i) - j]).collect())
        .collect()
}

#[test]
fn hand_example() {
    let seed = [1, 0, 1, 1, 0, 0];
    let input = [1, 1, 0, 1];
    let t = explicit_matrix(&seed, 3, 4);
    // every diagonal is constant
    for i in 1..3 {
        for j in 1..4 {
            assert_eq!(t[i][j], t[i - 1][j - 1]);
        }
    }
    let expected: Vec<u8> = t
        .iter()
        .map(|row| row.iter().zip(&input).map(|(a, b)| a & b).sum::<u8>() % 2)
        .collect();
    assert_eq!(expected, vec![1, 1, 1]);
    let out = toeplitz_naive(&bits(&seed), &bits(&input), 3).unwrap();
    assert_eq!(out, bits(&expected));
    for l in 1..=4 {
        let job = ToeplitzJob::new(4, 3, l, bits(&seed)).unwrap();
        assert_eq!(toeplitz_fft(&job, &bits(&input)).unwrap(), out);
    }
}

#[test]
fn zero_seed_and_parity_row() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let input = Bits::random(300, &mut rng);
    let zero = toeplitz_naive(&Bits::zeros(300 + 20 - 1), &input, 20).unwrap();
    assert_eq!(zero.count_ones(), 0);
    let ones = Bits::from_bools(&vec![true; 300]);
    let parity = toeplitz_naive(&ones, &input, 1).unwrap();
    assert_eq!(parity.get(0), input.count_ones() % 2 == 1);
    let job = ToeplitzJob::new(300, 20, 64, Bits::random(319, &mut rng)).unwrap();
    assert_eq!(
        toeplitz_fft(&job, &Bits::zeros(300)).unwrap().count_ones(),
        0
    );
}

#[test]
fn length_checks() {
    let seed = Bits::zeros(10);
    assert!(matches!(
        toeplitz_naive(&seed, &Bits::zeros(8), 4),
        Err(Error::SeedLength {
            expected: 11,
            got: 10
        })
    ));
    assert!(toeplitz_naive(&Bits::zeros(12), &Bits::zeros(4), 9).is_err());
    assert!(ToeplitzJob::new(8, 3, 9, Bits::zeros(10)).is_err());
    assert!(ToeplitzJob::new(8, 3, 0, Bits::zeros(10)).is_err());
    let job = ToeplitzJob::new(8, 3, 4, Bits::zeros(10)).unwrap();
    assert!(toeplitz_fft(&job, &Bits::zeros(7)).is_err());
    assert!(job.with_tile_rows(0).is_err());
}

#[test]
fn fft_matches_naive_on_random_jobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..200 {
        let n = rng.gen_range(1..=2048usize);
        let m = rng.gen_range(1..=n.min(256));
        let l = rng.gen_range(1..=n);
        let seed = Bits::random(m + n - 1, &mut rng);
        let input = Bits::random(n, &mut rng);
        let job = ToeplitzJob::new(n, m, l, seed.clone()).unwrap();
        assert_eq!(
            toeplitz_fft(&job, &input).unwrap(),
            toeplitz_naive(&seed, &input, m).unwrap()
        );
    }
}

#[test]
fn row_tiles_match_a_single_tile() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let (n, m) = (3000, 700);
    let seed = Bits::random(m + n - 1, &mut rng);
    let input = Bits::random(n, &mut rng);
    let reference = toeplitz_naive(&seed, &input, m).unwrap();
    for rows in [1, 7, 100, 350, 699, 700] {
        let job = ToeplitzJob::new(n, m, 512, seed.clone())
            .unwrap()
            .with_tile_rows(rows)
            .unwrap();
        assert_eq!(
            toeplitz_fft(&job, &input).unwrap(),
            reference,
            "tile rows {rows}"
        );
    }
}

#[test]
fn two_universal_collision_rate() {
    let (m, n) = (16, 64);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u = Bits::random(n, &mut rng);
    let mut v = Bits::random(n, &mut rng);
    if u == v {
        v.set(0, !v.get(0));
    }
    let trials = 100_000;
    let mut collisions = 0;
    for _ in 0..trials {
        let seed = Bits::random(m + n - 1, &mut rng);
        if toeplitz_naive(&seed, &u, m).unwrap() == toeplitz_naive(&seed, &v, m).unwrap() {
            collisions += 1;
        }
    }
    let limit = 2.0 * 2f64.powi(-16);
    let sigma = (limit / trials as f64).sqrt();
    assert!(
        (collisions as f64 / trials as f64) <= limit + 3.0 * sigma,
        "{collisions} collisions"
    );
}

#[test]
fn bit_files_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for len in [0usize, 1, 7, 8, 9, 63, 64, 65, 1000] {
        let b = Bits::random(len, &mut rng);
        let mut buf = Vec::new();
        b.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + len.div_ceil(8));
        assert_eq!(&buf[..8], &(len as u64).to_le_bytes());
        assert_eq!(Bits::read_from(&buf[..]).unwrap(), b);
    }
    // bit 0 is the least significant bit of byte 0
    let b = bits(&[1, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
    assert_eq!(b.to_bytes(), vec![0x01, 0x02]);
    assert!(Bits::read_from(&[3u8, 0, 0, 0, 0, 0, 0, 0, 0xff][..]).is_err());
    assert!(Bits::read_from(&[16u8, 0, 0, 0, 0, 0, 0, 0, 0xff][..]).is_err());
    assert!(Bits::read_from(&[1u8, 0, 0][..]).is_err());
}

#[test]
fn bits_extend_and_slice() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let a = Bits::random(100, &mut rng);
    let b = Bits::random(77, &mut rng);
    let mut c = a.clone();
    c.extend(&b);
    let expect: Vec<bool> = a.iter().chain(b.iter()).collect();
    assert_eq!(c.to_bools(), expect);
    assert_eq!(c.slice_padded(90, 20).to_bools(), expect[90..110].to_vec());
    assert_eq!(c.slice_padded(170, 10).to_bools()[7..], [false; 3]);
}

#[test]
fn extract_reports_error_and_keeps_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (n, m) = (500, 100);
    let seed = Bits::random(n + m - 1, &mut rng);
    let input = Bits::random(n, &mut rng);
    let job = ToeplitzJob::new(n, m, 128, seed.clone()).unwrap();
    let (out, s) = extract(&job, &input, 100.0).unwrap();
    assert_eq!(s.eps_ext, 1.0);
    assert_eq!(out, toeplitz_naive(&seed, &input, m).unwrap());
    assert_eq!(job.seed(), &seed);
    let (_, s) = extract(&job, &input, 140.0).unwrap();
    assert_eq!(s.eps_ext, 2f64.powi(-20));
    assert!(matches!(
        extract(&job, &input, 99.0),
        Err(Error::InsufficientEntropy { .. })
    ));
}

#[test]
fn certificate_sized_extraction() {
    let budget = ErrorBudget::from_targets(1e-6, 1e-6).unwrap();
    let p = ProtocolParams {
        n: 950_000,
        gamma: 0.05,
        omega_exp: 0.85,
        delta: 0.01,
        eps_h: budget.eps_h,
        eps_eat: budget.eps_eat,
        threshold: ThresholdRule::SpotCheck,
    };
    let cert = outer_optimize(&p).unwrap();
    let k = cert.hmin_lower;
    let m = output_length(k, budget.eps_ext).floor() as usize;
    assert!(m > 0);
    let n = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let job = ToeplitzJob::with_default_blocks(n, m, Bits::random(n + m - 1, &mut rng)).unwrap();
    let (out, s) = extract(&job, &Bits::random(n, &mut rng), k).unwrap();
    assert_eq!(out.len(), m);
    assert_relative_eq!(s.eps_ext, extractor_error(k, m as f64).unwrap());
    assert!(s.eps_ext <= budget.eps_ext);
    assert_eq!(m as f64, (k - 2.0 * (1.0 / budget.eps_ext).log2()).floor());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extraction_is_linear(seed_val in any::<u64>(), n in 1usize..600, mfrac in 0.0f64..1.0) {
        let m = ((n as f64 * mfrac) as usize).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed_val);
        let seed = Bits::random(m + n - 1, &mut rng);
        let u = Bits::random(n, &mut rng);
        let v = Bits::random(n, &mut rng);
        let mut w = u.clone();
        w.xor_assign(&v);
        let job = ToeplitzJob::with_default_blocks(n, m, seed).unwrap();
        let mut lhs = toeplitz_fft(&job, &u).unwrap();
        lhs.xor_assign(&toeplitz_fft(&job, &v).unwrap());
        prop_assert_eq!(lhs, toeplitz_fft(&job, &w).unwrap());
    }

    #[test]
    fn block_length_does_not_change_output(seed_val in any::<u64>(), n in 1usize..600, l1 in 1usize..600, l2 in 1usize..600) {
        let m = n.div_ceil(3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed_val);
        let seed = Bits::random(m + n - 1, &mut rng);
        let input = Bits::random(n, &mut rng);
        let a = ToeplitzJob::new(n, m, l1.min(n), seed.clone()).unwrap();
        let b = ToeplitzJob::new(n, m, l2.min(n), seed).unwrap();
        prop_assert_eq!(toeplitz_fft(&a, &input).unwrap(), toeplitz_fft(&b, &input).unwrap());
    }
}

#[test]
fn single_rows_match_the_full_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (n, m) = (777, 300);
    let seed = Bits::random(m + n - 1, &mut rng);
    let input = Bits::random(n, &mut rng);
    let full = toeplitz_naive(&seed, &input, m).unwrap();
    for i in 0..m {
        assert_eq!(toeplitz_row(&seed, &input, m, i).unwrap(), full.get(i));
    }
    assert!(toeplitz_row(&seed, &input, m, m).is_err());
}
