use polent::fock::{expectation_real, FockOperator, FockSpace};
use polent::insep::{i_j_printed, Verdict};
use polent::protocol_a::*;
use polent::stokes::{balanced_config, balanced_config_shifted};
use polent::{Error, Execution};

struct GoldenRow {
    j: usize,
    cutoff: usize,
    degrees: [f64; 3],
}

fn golden() -> Vec<GoldenRow> {
    let text = include_str!("data/exact_oracle.csv");
    text.lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            GoldenRow {
                j: f[0].parse().unwrap(),
                cutoff: f[1].parse().unwrap(),
                degrees: [f[2].parse().unwrap(), f[3].parse().unwrap(), f[4].parse().unwrap()],
            }
        })
        .collect()
}

#[test]
fn exact_oracle_matches_golden_file() {
    let (x, y) = balanced_config(1.0).unwrap();
    let rows = golden();
    assert_eq!(rows.len(), 7);
    let reports = i_of_j_sweep(6, &x, &y, Execution::Parallel).unwrap();
    for (row, rep) in rows.iter().zip(&reports) {
        assert_eq!(row.j, rep.j);
        assert_eq!(row.cutoff, rep.cutoff);
        assert!(1.0 - rep.norm_sqr < 1e-12);
        for (k, &(a, b)) in PAIRS.iter().enumerate() {
            let got = rep.degree(a, b).unwrap();
            assert!((got - row.degrees[k]).abs() < 1e-9, "J={} {a:?}{b:?}: {got} vs {}", row.j, row.degrees[k]);
        }
    }
}

#[test]
fn golden_values_follow_linear_law() {
    // Independent check of the frozen numbers: the linearized degree on |J>
    // is √3 (1 + 2<n>) with <n> = J/2 per mode and no pair coherence.
    for row in golden() {
        let expect = 3f64.sqrt() * (row.j as f64 + 1.0);
        for d in row.degrees {
            assert!((d - expect).abs() < 1e-9, "J={}: {d} vs {expect}", row.j);
        }
    }
}

#[test]
fn comparison_with_printed_closed_form() {
    let (x, y) = balanced_config(1.0).unwrap();
    println!("J,I_printed,I_exact_S1S2,I_exact_S1S3,I_exact_S2S3");
    for rep in i_of_j_sweep(6, &x, &y, Execution::Parallel).unwrap() {
        let printed = i_j_printed(rep.j as u32);
        let exact: Vec<f64> = PAIRS.iter().map(|&(a, b)| rep.degree(a, b).unwrap()).collect();
        println!("{},{printed},{},{},{}", rep.j, exact[0], exact[1], exact[2]);
        assert!(printed >= 1.0 && exact.iter().all(|&e| e >= 1.0));
        if rep.j <= 1 {
            assert!((printed - exact[0]).abs() < 1e-9);
        } else {
            assert!(exact[0] - printed > 1.0, "J={}", rep.j);
        }
    }
}

#[test]
fn zero_outcome_never_inseparable() {
    let (x, y) = balanced_config(1.0).unwrap();
    let rep = i_of_j_exact(0, &x, &y).unwrap();
    for p in &rep.pairs {
        match &p.report {
            Ok(r) => assert_eq!(r.verdict, Verdict::Undecided),
            Err(Error::DegenerateDenominator { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn theta_lattice_invariance() {
    let (x, y) = balanced_config(1.0).unwrap();
    let base: Vec<_> = (0..3).map(|j| i_of_j_exact(j, &x, &y).unwrap()).collect();
    for n_x in 0..3 {
        for n in 0..3 {
            let (sx, sy) = balanced_config_shifted(1.0, n_x, n).unwrap();
            for (j, reference) in base.iter().enumerate() {
                let rep = i_of_j_exact(j, &sx, &sy).unwrap();
                for &(a, b) in &PAIRS {
                    let (u, v) = (rep.degree(a, b).unwrap(), reference.degree(a, b).unwrap());
                    assert!((u - v).abs() < 1e-10, "n_x={n_x} n={n} J={j} {a:?}{b:?}");
                }
            }
        }
    }
}

#[test]
fn dark_state_photon_numbers() {
    for j in 0..5 {
        let psi = build_j_state(j, 2).unwrap();
        let space: FockSpace = psi.space().clone();
        let number = |m| {
            let a = FockOperator::ladder(space.cutoffs()[m]).unwrap().embed(m, &space).unwrap();
            a.adjoint().mul(&a).unwrap()
        };
        let party_x = number(0).add(&number(2)).unwrap();
        assert!((expectation_real(&psi, &party_x).unwrap() - j as f64).abs() < 1e-12);
        assert!((expectation_real(&psi, &number(0)).unwrap() - j as f64 / 2.0).abs() < 1e-12);
    }
    assert!(matches!(build_j_state(1, 1), Err(Error::MarginTooSmall(1))));
}

#[test]
fn probabilities_sum_to_one() {
    for lam in [0.3, 0.5, 0.7] {
        let x: f64 = lam * lam;
        let mut n = 0u32;
        while f64::from(n + 2) * x.powi(n as i32) >= 1e-10 {
            n += 1;
        }
        let total: f64 = (0..=n).map(|j| outcome_prob(lam, j).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9, "λ={lam}: {total}");
        assert!((outcome_cdf(lam, n).unwrap() - total).abs() < 1e-12);
    }
}

#[test]
fn sampler_frequencies_within_three_sigma() {
    let count = 100_000;
    for lam in [0.3, 0.5, 0.7] {
        let draws = sample_outcomes(lam, 2024, count, Execution::Parallel).unwrap();
        for j in 0..6u32 {
            let p = outcome_prob(lam, j).unwrap();
            let freq = draws.iter().filter(|&&d| d == j).count() as f64 / count as f64;
            let sigma = (p * (1.0 - p) / count as f64).sqrt();
            assert!((freq - p).abs() < 3.0 * sigma + 1e-12, "λ={lam} J={j}: {freq} vs {p}");
        }
        let x = lam * lam;
        let mean = draws.iter().map(|&d| f64::from(d)).sum::<f64>() / count as f64;
        let var = 2.0 * x / (1.0 - x).powi(2);
        let expect = outcome_mean(lam).unwrap();
        assert!((mean - expect).abs() < 3.0 * (var / count as f64).sqrt(), "λ={lam}: mean {mean} vs {expect}");
    }
}

#[test]
fn sampler_zero_probability_at_half() {
    let draws = sample_outcomes(0.5, 7, 100_000, Execution::Parallel).unwrap();
    let p0 = draws.iter().filter(|&&d| d == 0).count() as f64 / draws.len() as f64;
    assert!((p0 - 0.5625).abs() < 0.005, "{p0}");
    assert!(sample_outcomes(0.0, 1, 1000, Execution::Parallel).unwrap().iter().all(|&d| d == 0));
}

#[test]
fn sampler_independent_of_execution() {
    let a = sample_outcomes(0.6, 99, 10_000, Execution::Parallel).unwrap();
    let b = sample_outcomes(0.6, 99, 10_000, Execution::Sequential).unwrap();
    assert_eq!(a, b);
}

#[test]
fn stokes_pair_labels() {
    assert_eq!(PAIRS.map(|(a, b)| (a.index(), b.index())), [(1, 2), (1, 3), (2, 3)]);
}
