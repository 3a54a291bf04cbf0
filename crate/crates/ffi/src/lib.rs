//! C ABI for `sandwich-forms`.
//!
//! Spaces and forms are opaque handles created by `sf_*_new`-style calls and
//! released with the matching `_free`. Every fallible call returns an
//! [`SfStatus`]; on failure [`sf_last_error_message`] describes the error.
//! Matrices are dense and row-major with `n * n` entries, where `n` is the
//! number of nodes of the space. Node sets are byte masks of length `n`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;
use std::sync::Arc;

use sandwich_forms::capacity::capacity;
use sandwich_forms::decomposition::{active_main_part, killing_part};
use sandwich_forms::domination::{dominates, semigroup};
use sandwich_forms::form::GraphForm;
use sandwich_forms::models::{interval_laplacian, BoundaryKind};
use sandwich_forms::sandwich::{recover_pair, sandwich_check, Clause};
use sandwich_forms::{DMatrix, DVector, FormError, MeasureSpace, NodeSet, QuadForm};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotMarkovian = 4,
    DomainViolation = 5,
    NegativeTime = 6,
    SpaceMismatch = 7,
    NotAdmissible = 8,
    NotSandwiched = 9,
    TooLarge = 10,
    Internal = 11,
    Panic = 12,
}

/// Sandwich clause that failed, or `None`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfClause {
    None = -1,
    OrderIdeal = 0,
    Positive = 1,
    Local = 2,
    Extension = 3,
    KillingBand = 4,
}

/// Finite measure space.
pub struct SfSpace(Arc<MeasureSpace>);

/// Quadratic form on a space.
pub struct SfForm(QuadForm);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(e: &FormError) -> SfStatus {
    match e {
        FormError::DimensionMismatch { .. } | FormError::BadDimension(_) => {
            SfStatus::DimensionMismatch
        }
        FormError::NotMarkovian(_) => SfStatus::NotMarkovian,
        FormError::DomainViolation { .. } | FormError::RangeViolation { .. } => {
            SfStatus::DomainViolation
        }
        FormError::NegativeTime(_) => SfStatus::NegativeTime,
        FormError::SpaceMismatch => SfStatus::SpaceMismatch,
        FormError::NotAdmissible(_)
        | FormError::Infeasible(_)
        | FormError::NotRepresentable { .. } => SfStatus::NotAdmissible,
        FormError::NotSandwiched(_) => SfStatus::NotSandwiched,
        FormError::TooLarge { .. } => SfStatus::TooLarge,
        FormError::InternalInvariantViolation(_) | FormError::Numerical(_) => SfStatus::Internal,
        _ => SfStatus::InvalidArgument,
    }
}

struct Failure(SfStatus, String);

impl From<FormError> for Failure {
    fn from(e: FormError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SfStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, records any error and turns panics into [`SfStatus::Panic`].
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            SfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside sandwich-forms");
            SfStatus::Panic
        }
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    *p = value;
    Ok(())
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn mask(p: *const u8, n: usize) -> Result<NodeSet, Failure> {
    if p.is_null() {
        return Ok(NodeSet::all(n));
    }
    Ok(slice::from_raw_parts(p, n)
        .iter()
        .enumerate()
        .filter(|(_, &b)| b != 0)
        .map(|(x, _)| x)
        .collect())
}

fn write_mask(set: &NodeSet, out: &mut [u8]) {
    for (x, b) in out.iter_mut().enumerate() {
        *b = u8::from(set.contains(x));
    }
}

fn write_matrix(m: &DMatrix<f64>, out: &mut [f64]) {
    let n = m.nrows();
    for x in 0..n {
        for y in 0..n {
            out[x * n + y] = m[(x, y)];
        }
    }
}

fn read_matrix(data: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, data)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn sf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Space with `n` nodes named `"0"`, `"1"`, ... `boundary` may be null.
///
/// # Safety
/// `masses` must point to `n` values, `boundary` (if not null) to `n`
/// bytes, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_space_new(
    n: usize,
    masses: *const f64,
    boundary: *const u8,
    out: *mut *mut SfSpace,
) -> SfStatus {
    guard(|| {
        let mass = input(masses, n, "masses")?.to_vec();
        let boundary = if boundary.is_null() {
            NodeSet::new()
        } else {
            mask(boundary, n)?
        };
        let names = (0..n).map(|x| x.to_string()).collect();
        let space = MeasureSpace::new(names, mass, boundary)?;
        store(out, SfSpace(space.into_shared()))
    })
}

/// # Safety
/// `space` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sf_space_free(space: *mut SfSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// # Safety
/// `space` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn sf_space_len(space: *const SfSpace) -> usize {
    space.as_ref().map_or(0, |s| s.0.len())
}

/// Form with the given coefficient array and support (null for all nodes).
///
/// # Safety
/// `coeff` must point to `n * n` values and `support` (if not null) to `n`
/// bytes.
#[no_mangle]
pub unsafe extern "C" fn sf_form_explicit(
    space: *const SfSpace,
    support: *const u8,
    coeff: *const f64,
    out: *mut *mut SfForm,
) -> SfStatus {
    guard(|| {
        let space = handle(space, "space")?;
        let n = space.0.len();
        let coeff = read_matrix(input(coeff, n * n, "coeff")?, n);
        let form = QuadForm::new(space.0.clone(), mask(support, n)?, coeff)?;
        store(out, SfForm(form))
    })
}

/// Form `½ Σ b(x, y)(f(x) − f(y))² + Σ c(x) f(x)²` from symmetric edge
/// weights `b` and killing weights `c` (null for none).
///
/// # Safety
/// `weights` must point to `n * n` values, `killing` (if not null) to `n`
/// values and `support` (if not null) to `n` bytes.
#[no_mangle]
pub unsafe extern "C" fn sf_form_from_graph(
    space: *const SfSpace,
    weights: *const f64,
    killing: *const f64,
    support: *const u8,
    out: *mut *mut SfForm,
) -> SfStatus {
    guard(|| {
        let space = handle(space, "space")?;
        let n = space.0.len();
        let b = read_matrix(input(weights, n * n, "weights")?, n);
        let c = if killing.is_null() {
            DVector::zeros(n)
        } else {
            DVector::from_column_slice(input(killing, n, "killing")?)
        };
        let g = GraphForm::new(space.0.clone(), b, c, mask(support, n)?)?;
        store(out, SfForm(g.to_quad_form()))
    })
}

/// Boundary data for [`sf_interval_laplacian`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfBoundary {
    Dirichlet = 0,
    Neumann = 1,
    Robin = 2,
}

/// Finite-difference Laplacian on `[0, 1]` with `n` interior nodes. The
/// Robin coefficients are ignored for the other boundary kinds.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_interval_laplacian(
    n: usize,
    kind: SfBoundary,
    beta_left: f64,
    beta_right: f64,
    out: *mut *mut SfForm,
) -> SfStatus {
    guard(|| {
        let kind = match kind {
            SfBoundary::Dirichlet => BoundaryKind::Dirichlet,
            SfBoundary::Neumann => BoundaryKind::Neumann,
            SfBoundary::Robin => BoundaryKind::Robin {
                left: beta_left,
                right: beta_right,
            },
        };
        store(out, SfForm(interval_laplacian(n, kind, None, None)?))
    })
}

/// # Safety
/// `form` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sf_form_free(form: *mut SfForm) {
    if !form.is_null() {
        drop(Box::from_raw(form));
    }
}

/// Number of nodes of the space the form lives on.
///
/// # Safety
/// `form` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn sf_form_len(form: *const SfForm) -> usize {
    form.as_ref().map_or(0, |f| f.0.len())
}

/// Copies the coefficient array (`n * n`) and the support mask (`n`).
/// Either output may be null.
///
/// # Safety
/// Non-null outputs must have room for the stated number of entries.
#[no_mangle]
pub unsafe extern "C" fn sf_form_data(
    form: *const SfForm,
    coeff: *mut f64,
    support: *mut u8,
) -> SfStatus {
    guard(|| {
        let q = &handle(form, "form")?.0;
        let n = q.len();
        if !coeff.is_null() {
            write_matrix(q.coeff(), output(coeff, n * n, "coeff")?);
        }
        if !support.is_null() {
            write_mask(q.support(), output(support, n, "support")?);
        }
        Ok(())
    })
}

/// `Q(f, g)` for functions vanishing off the domain.
///
/// # Safety
/// `f` and `g` must point to `n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_form_evaluate(
    form: *const SfForm,
    f: *const f64,
    g: *const f64,
    out: *mut f64,
) -> SfStatus {
    guard(|| {
        let q = &handle(form, "form")?.0;
        let n = q.len();
        let f = DVector::from_column_slice(input(f, n, "f")?);
        let g = DVector::from_column_slice(input(g, n, "g")?);
        let v = q.evaluate(&f, &g)?;
        put(out, v, "out")?;
        Ok(())
    })
}

/// # Safety
/// `form` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_active_main_part(
    form: *const SfForm,
    out: *mut *mut SfForm,
) -> SfStatus {
    guard(|| store(out, SfForm(active_main_part(&handle(form, "form")?.0)?)))
}

/// # Safety
/// `form` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_killing_part(form: *const SfForm, out: *mut *mut SfForm) -> SfStatus {
    guard(|| store(out, SfForm(killing_part(&handle(form, "form")?.0)?)))
}

/// Kernel of `e^{−tL}` as an `n * n` matrix, zero off the domain.
///
/// # Safety
/// `out` must have room for `n * n` values.
#[no_mangle]
pub unsafe extern "C" fn sf_semigroup(form: *const SfForm, t: f64, out: *mut f64) -> SfStatus {
    guard(|| {
        let q = &handle(form, "form")?.0;
        let n = q.len();
        write_matrix(&semigroup(q, t)?, output(out, n * n, "out")?);
        Ok(())
    })
}

/// Verdicts of the kernel and the coefficient criteria for `q ⪯ q2`.
///
/// # Safety
/// `times` must point to `n_times` values; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_dominates(
    q: *const SfForm,
    q2: *const SfForm,
    times: *const f64,
    n_times: usize,
    tol: f64,
    semigroup_holds: *mut bool,
    form_holds: *mut bool,
) -> SfStatus {
    guard(|| {
        let (q, q2) = (&handle(q, "q")?.0, &handle(q2, "q2")?.0);
        let times = input(times, n_times, "times")?;
        if times.is_empty() {
            return Err(Failure(SfStatus::InvalidArgument, "no times given".into()));
        }
        let r = dominates(q, q2, times, tol)?;
        put(semigroup_holds, r.semigroup_verdict(), "semigroup_holds")?;
        put(form_holds, r.form_verdict(), "form_holds")?;
        Ok(())
    })
}

/// Capacity of the node set `set`; `INFINITY` when it leaves the domain.
///
/// # Safety
/// `set` must point to `n` bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_capacity(
    form: *const SfForm,
    set: *const u8,
    out: *mut f64,
) -> SfStatus {
    guard(|| {
        let q = &handle(form, "form")?.0;
        if set.is_null() {
            return Err(null("set"));
        }
        let v = capacity(q, &mask(set, q.len())?)?;
        put(out, v, "out")?;
        Ok(())
    })
}

/// Whether `qprime` is sandwiched between `q` and its active main part,
/// and the first failing clause otherwise.
///
/// # Safety
/// The outputs must be writable; `failed` may be null.
#[no_mangle]
pub unsafe extern "C" fn sf_sandwich_check(
    q: *const SfForm,
    qprime: *const SfForm,
    is_sandwiched: *mut bool,
    failed: *mut SfClause,
) -> SfStatus {
    guard(|| {
        let v = sandwich_check(&handle(q, "q")?.0, &handle(qprime, "qprime")?.0)?;
        put(is_sandwiched, v.is_sandwiched, "is_sandwiched")?;
        if !failed.is_null() {
            *failed = match v.witness.map(|w| w.clause) {
                None => SfClause::None,
                Some(Clause::OrderIdeal) => SfClause::OrderIdeal,
                Some(Clause::Positive) => SfClause::Positive,
                Some(Clause::Local) => SfClause::Local,
                Some(Clause::Extension) => SfClause::Extension,
                Some(Clause::KillingBand) => SfClause::KillingBand,
            };
        }
        Ok(())
    })
}

/// The pair `(O, μ)` of a sandwiched form: `O` as a mask, `μ` as `n`
/// values. Fails with [`SfStatus::NotSandwiched`] otherwise.
///
/// # Safety
/// `o` must have room for `n` bytes and `mu` for `n` values.
#[no_mangle]
pub unsafe extern "C" fn sf_recover_pair(
    q: *const SfForm,
    qprime: *const SfForm,
    o: *mut u8,
    mu: *mut f64,
) -> SfStatus {
    guard(|| {
        let q = &handle(q, "q")?.0;
        let n = q.len();
        let (o, mu) = (output(o, n, "o")?, output(mu, n, "mu")?);
        let p = recover_pair(q, &handle(qprime, "qprime")?.0)?;
        write_mask(&p.o, o);
        mu.copy_from_slice(p.mu.as_slice());
        Ok(())
    })
}
