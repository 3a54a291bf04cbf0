use std::ffi::CStr;
use std::ptr;

use sandwich_forms_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sf_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

unsafe fn p3(killing: Option<&[f64; 3]>) -> (*mut SfSpace, *mut SfForm) {
    let mut space = ptr::null_mut();
    assert_eq!(
        sf_space_new(3, [1.0; 3].as_ptr(), ptr::null(), &mut space),
        SfStatus::Ok
    );
    let w = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
    let mut form = ptr::null_mut();
    let c = killing.map_or(ptr::null(), |k| k.as_ptr());
    assert_eq!(
        sf_form_from_graph(space, w.as_ptr(), c, ptr::null(), &mut form),
        SfStatus::Ok
    );
    (space, form)
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(sf_version()) };
    assert_eq!(v.to_str().unwrap(), sandwich_forms::VERSION);
}

#[test]
fn capacity_and_decomposition() {
    unsafe {
        let (space, q) = p3(Some(&[0.0, 5.0, 0.0]));
        let mut main = ptr::null_mut();
        let mut kill = ptr::null_mut();
        assert_eq!(sf_active_main_part(q, &mut main), SfStatus::Ok);
        assert_eq!(sf_killing_part(q, &mut kill), SfStatus::Ok);
        let mut coeff = [0.0; 9];
        assert_eq!(
            sf_form_data(kill, coeff.as_mut_ptr(), ptr::null_mut()),
            SfStatus::Ok
        );
        assert_eq!(coeff, [0.0, 0.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.0, 0.0]);

        let mut cap = 0.0;
        assert_eq!(
            sf_capacity(main, [1u8, 0, 0].as_ptr(), &mut cap),
            SfStatus::Ok
        );
        let (_, plain) = p3(None);
        let mut cap_plain = 0.0;
        assert_eq!(
            sf_capacity(plain, [1u8, 0, 0].as_ptr(), &mut cap_plain),
            SfStatus::Ok
        );
        assert!((cap_plain - 1.6).abs() < 1e-12);

        let f = [1.0, 2.0, 4.0];
        let mut e = 0.0;
        assert_eq!(
            sf_form_evaluate(q, f.as_ptr(), f.as_ptr(), &mut e),
            SfStatus::Ok
        );
        assert!((e - (1.0 + 4.0 + 20.0)).abs() < 1e-12);

        for h in [main, kill, q, plain] {
            sf_form_free(h);
        }
        sf_space_free(space);
    }
}

#[test]
fn dirichlet_neumann_domination() {
    unsafe {
        let (mut d, mut n) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(
            sf_interval_laplacian(7, SfBoundary::Dirichlet, 0.0, 0.0, &mut d),
            SfStatus::Ok
        );
        assert_eq!(
            sf_interval_laplacian(7, SfBoundary::Neumann, 0.0, 0.0, &mut n),
            SfStatus::Ok
        );
        let times = [0.05, 0.5, 2.0];
        let (mut sg, mut fm) = (false, false);
        assert_eq!(
            sf_dominates(d, n, times.as_ptr(), 3, 1e-12, &mut sg, &mut fm),
            SfStatus::Ok
        );
        assert!(sg && fm);
        assert_eq!(
            sf_dominates(n, d, times.as_ptr(), 3, 1e-12, &mut sg, &mut fm),
            SfStatus::Ok
        );
        assert!(!sg && !fm);
        assert_eq!(
            sf_dominates(d, n, times.as_ptr(), 0, 1e-12, &mut sg, &mut fm),
            SfStatus::InvalidArgument
        );

        let len = sf_form_len(d);
        let mut k = vec![0.0; len * len];
        assert_eq!(sf_semigroup(d, 0.1, k.as_mut_ptr()), SfStatus::Ok);
        assert!(k.iter().all(|&v| v >= -1e-12));
        assert_eq!(
            sf_semigroup(d, -1.0, k.as_mut_ptr()),
            SfStatus::NegativeTime
        );
        assert!(!last_error().is_empty());
        sf_form_free(d);
        sf_form_free(n);
    }
}

#[test]
fn robin_pair_is_recovered() {
    unsafe {
        let (mut d, mut r) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(
            sf_interval_laplacian(5, SfBoundary::Dirichlet, 0.0, 0.0, &mut d),
            SfStatus::Ok
        );
        assert_eq!(
            sf_interval_laplacian(5, SfBoundary::Robin, 2.0, 3.0, &mut r),
            SfStatus::Ok
        );
        let mut ok = false;
        let mut clause = SfClause::Local;
        assert_eq!(sf_sandwich_check(d, r, &mut ok, &mut clause), SfStatus::Ok);
        assert!(ok);
        assert_eq!(clause, SfClause::None);
        let mut o = [9u8; 7];
        let mut mu = [9.0; 7];
        assert_eq!(
            sf_recover_pair(d, r, o.as_mut_ptr(), mu.as_mut_ptr()),
            SfStatus::Ok
        );
        assert_eq!(o, [1; 7]);
        assert_eq!(mu, [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.0]);
        // the reverse is not sandwiched: the domain of Q is not an extension
        assert_eq!(sf_sandwich_check(r, d, &mut ok, &mut clause), SfStatus::Ok);
        assert!(!ok);
        assert_ne!(clause, SfClause::None);
        assert_eq!(
            sf_recover_pair(r, d, o.as_mut_ptr(), mu.as_mut_ptr()),
            SfStatus::NotSandwiched
        );
        sf_form_free(d);
        sf_form_free(r);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut space = ptr::null_mut();
        assert_eq!(
            sf_space_new(2, ptr::null(), ptr::null(), &mut space),
            SfStatus::NullPointer
        );
        assert_eq!(
            sf_space_new(2, [1.0, -1.0].as_ptr(), ptr::null(), &mut space),
            SfStatus::InvalidArgument
        );
        assert!(!last_error().is_empty());
        assert_eq!(
            sf_space_new(2, [1.0, 1.0].as_ptr(), ptr::null(), &mut space),
            SfStatus::Ok
        );
        assert!(last_error().is_empty());
        let mut form = ptr::null_mut();
        // positive off-diagonal: not Markovian, but a valid form
        let coeff = [1.0, 0.5, 0.5, 1.0];
        assert_eq!(
            sf_form_explicit(space, ptr::null(), coeff.as_ptr(), &mut form),
            SfStatus::Ok
        );
        let mut other = ptr::null_mut();
        assert_eq!(
            sf_active_main_part(form, &mut other),
            SfStatus::NotMarkovian
        );
        assert_eq!(
            sf_active_main_part(ptr::null(), &mut other),
            SfStatus::NullPointer
        );
        assert_eq!(sf_space_len(space), 2);
        assert_eq!(sf_form_len(ptr::null()), 0);
        sf_form_free(form);
        sf_space_free(space);
        sf_form_free(ptr::null_mut());
        sf_space_free(ptr::null_mut());
    }
}
