use fkm_core::clifford::{iota_k, ComplexRational, ComplexRationalMatrix};
use fkm_core::exactmat::{frac, ldl_psd, rat, PsdCertificate, RationalMatrix};
use fkm_core::sdpcert::tau;
use proptest::prelude::*;

fn small_matrix(rows: usize, cols: usize) -> impl Strategy<Value = RationalMatrix> {
    prop::collection::vec((-4i64..=4, 1i64..=3), rows * cols)
        .prop_map(move |v| RationalMatrix::from_fn(rows, cols, |i, j| frac(v[i * cols + j].0, v[i * cols + j].1)))
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=5, 1usize..=5)
}

fn complex_matrix(n: usize) -> impl Strategy<Value = ComplexRationalMatrix> {
    prop::collection::vec((-3i64..=3, -3i64..=3), n * n).prop_map(move |v| {
        ComplexRationalMatrix::from_fn(n, n, |i, j| ComplexRational::int(v[i * n + j].0, v[i * n + j].1))
    })
}

proptest! {
    #[test]
    fn matrix_text_round_trip(m in dims().prop_flat_map(|(r, c)| small_matrix(r, c))) {
        let back: RationalMatrix = m.to_string().parse().unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn rank_of_gram(a in dims().prop_flat_map(|(r, c)| small_matrix(r, c))) {
        let g = &a * &a.transpose();
        prop_assert_eq!(g.rank(), a.rank());
    }

    #[test]
    fn ldl_reconstructs_psd(a in dims().prop_flat_map(|(r, c)| small_matrix(r, c))) {
        let g = &a.transpose() * &a;
        let cert = ldl_psd(&g).unwrap();
        prop_assert!(cert.verify(&g));
        match cert {
            PsdCertificate::Psd { l, d } => {
                let dm = RationalMatrix::diagonal(&d);
                prop_assert_eq!(&(&l * &dm) * &l.transpose(), g.clone());
                prop_assert_eq!(dm.count_nonzero(), a.rank());
            }
            PsdCertificate::NotPsd { .. } => prop_assert!(false, "Gram matrix reported indefinite"),
        }
    }

    #[test]
    fn indefinite_witness_is_valid(a in (2usize..=5).prop_flat_map(|n| small_matrix(n, n)), shift in 1i64..=6) {
        let s = &(&a + &a.transpose()) - &RationalMatrix::identity(a.rows()).scale(&rat(shift));
        let cert = ldl_psd(&s).unwrap();
        prop_assert!(cert.verify(&s));
        if let PsdCertificate::NotPsd { witness, value } = &cert {
            prop_assert!(*value < rat(0));
            prop_assert_eq!(s.quad_form(witness), value.clone());
        }
    }

    #[test]
    fn iota_k_is_multiplicative(e in (1usize..=3).prop_flat_map(complex_matrix), seed in any::<u64>()) {
        let n = e.rows();
        let f = ComplexRationalMatrix::from_fn(n, n, |i, j| {
            let h = seed.wrapping_mul(31).wrapping_add((i * 7 + j) as u64);
            ComplexRational::int((h % 5) as i64 - 2, ((h / 5) % 5) as i64 - 2)
        });
        prop_assert_eq!(iota_k(&e.mul(&f)), &iota_k(&e) * &iota_k(&f));
        prop_assert_eq!(iota_k(&e.adjoint()), iota_k(&e).transpose());
    }

    #[test]
    fn tau_is_an_involution(m in (1usize..=5).prop_flat_map(|n| small_matrix(n, n)), k in 1usize..=5) {
        let k = 1 + (k - 1) % m.rows();
        prop_assert_eq!(tau(k, &tau(k, &m).unwrap()).unwrap(), m);
    }
}
