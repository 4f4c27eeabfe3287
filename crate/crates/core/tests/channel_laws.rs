use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qfilter::channels::*;
use qfilter::linalg::*;
use qfilter::random::random_density;
use qfilter::states::DensityOperator;

const LEVELS: usize = 40;

/// Truncated `|α>` from its Fock expansion.
fn coherent(alpha: Complex64) -> ComplexVector {
    let mut amp = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    ComplexVector::from_fn(LEVELS, |n, _| {
        if n > 0 {
            amp *= alpha / (n as f64).sqrt();
        }
        amp
    })
}

fn outer(a: &ComplexVector, b: &ComplexVector) -> ComplexMatrix {
    a * b.adjoint()
}

/// Image of `|α><β|` under loss with transmittance `t`.
fn dyad_image(a: Complex64, b: Complex64, t: f64) -> ComplexMatrix {
    let log_overlap = -0.5 * a.norm_sqr() - 0.5 * b.norm_sqr() + b.conj() * a;
    let s = t.sqrt();
    outer(&coherent(a * s), &coherent(b * s)) * ((1.0 - t) * log_overlap).exp()
}

#[test]
fn loss_maps_coherent_dyads_by_the_overlap_law() {
    let c = Complex64::new;
    let points = [
        c(0.0, 0.0),
        c(0.5, 0.0),
        c(-0.5, 0.0),
        c(1.0, 0.0),
        c(-1.0, 0.0),
        c(1.0, 1.0),
    ];
    for t in [0.1, 0.5, 0.9] {
        let k = loss_kraus(&LossChannel::from_transmittance(t).unwrap(), LEVELS);
        assert!(k.completeness_residual() < 1e-12);
        for &a in &points {
            for &b in &points {
                // superposition |α> + |β> probes the off-diagonal images
                let psi = coherent(a) + coherent(b);
                let norm2 = psi.norm_squared();
                if norm2 < 1e-6 {
                    continue;
                }
                let rho = DensityOperator::from_pure(&psi).unwrap();
                let got = apply_channel(&k, &rho).unwrap();
                let want = (dyad_image(a, a, t)
                    + dyad_image(b, b, t)
                    + dyad_image(a, b, t)
                    + dyad_image(b, a, t))
                .unscale(norm2);
                let err = max_abs_diff(got.matrix(), &want);
                assert!(err < 1e-12, "α={a} β={b} T={t}: {err:e}");
            }
        }
    }
}

#[test]
fn loss_composes_multiplicatively() {
    let mut r = ChaCha8Rng::seed_from_u64(9);
    let d = 10;
    for (t1, t2) in [(0.3, 0.7), (0.9, 0.9), (0.5, 0.2)] {
        let rho = random_density(d, 3, &mut r);
        let k1 = loss_kraus(&LossChannel::from_transmittance(t1).unwrap(), d);
        let k2 = loss_kraus(&LossChannel::from_transmittance(t2).unwrap(), d);
        let k12 = loss_kraus(&LossChannel::from_transmittance(t1 * t2).unwrap(), d);
        let seq = apply_channel(&k2, &apply_channel(&k1, &rho).unwrap()).unwrap();
        let once = apply_channel(&k12, &rho).unwrap();
        assert!(max_abs_diff(seq.matrix(), once.matrix()) < 1e-13);
    }
}

#[test]
fn depolarizing_matches_its_mixture_form() {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for n in 2..=5 {
        let rho = random_density(n, 2, &mut r);
        for p in [0.0, 0.25, 1.0] {
            let ch = DepolarizingChannel::new(n, p).unwrap();
            assert!(ch.kraus().completeness_residual() < 1e-13);
            let got = depolarize(&rho, &ch).unwrap();
            let want =
                rho.matrix().scale(1.0 - p) + ComplexMatrix::identity(n, n).scale(p / n as f64);
            assert!(max_abs_diff(got.matrix(), &want) < 1e-14);
        }
    }
}

#[test]
fn channel_spec_parses_both_kinds() {
    let d: ChannelSpec = serde_json::from_str(r#"{"type":"depolarizing","n":3,"p":0.2}"#).unwrap();
    assert_eq!(d, ChannelSpec::Depolarizing { n: 3, p: 0.2 });
    let l: ChannelSpec = serde_json::from_str(r#"{"type":"loss","R":0.4}"#).unwrap();
    assert_eq!(l, ChannelSpec::Loss { r: 0.4 });
}
