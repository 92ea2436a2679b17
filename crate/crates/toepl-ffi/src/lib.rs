//! C interface to `toepl`.
//!
//! Specs and potentials are opaque heap handles released with their `_free`
//! function. Every call returns a [`ToeplStatus`]; on failure the message is
//! available from [`toepl_last_error`] until the next failing call on the
//! same thread. Strings returned through out-pointers belong to the caller
//! and are released with [`toepl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use toepl::closed_forms::{complexity_formula, palindrome_formula, repetitivity_formula};
use toepl::debruijn::build_graph;
use toepl::oracle::{collect_language, collect_sturmian_language};
use toepl::spec_io::{bundled, parse_spec_str, AnySpec};
use toepl::spectral::{
    leading_source, lyapunov_sequence, measure, periodic_trace, spectrum_approx, Direction,
    PotFn, PotentialSpec, TransferContext,
};
use toepl::verify::{verify_coding, verify_sturmian};
use toepl::words::{SturmianSpec, Letter};
use toepl::Error;

/// Status codes; the nonzero values match the command line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToeplStatus {
    Ok = 0,
    /// Null pointer, invalid UTF-8 or an out-of-range argument.
    InvalidArgument = 1,
    /// Malformed spec or potential.
    Spec = 2,
    /// Depth, budget, range or pattern error.
    Range = 3,
    Verification = 4,
    Io = 5,
    /// A panic was caught at the boundary.
    Internal = 6,
}

/// A parsed subshift spec.
pub struct ToeplSpec(AnySpec);

/// A potential `(f, g)` for the Jacobi operator.
pub struct ToeplPotential(PotentialSpec);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(ToeplStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.exit_code() {
            2 => ToeplStatus::Spec,
            3 => ToeplStatus::Range,
            4 => ToeplStatus::Verification,
            5 => ToeplStatus::Io,
            _ => ToeplStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: &str) -> Failure {
    Failure(ToeplStatus::InvalidArgument, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ToeplStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ToeplStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            ToeplStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(&format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| invalid(&format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    out.write(v);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| invalid("string contains nul"))?;
    write_out(out, c.into_raw())
}

fn coding(spec: &ToeplSpec) -> Result<&toepl::CodingSpec, Failure> {
    match &spec.0 {
        AnySpec::Coding(c) => Ok(c),
        AnySpec::Sturmian(_) => Err(Error::Spec("this call needs a simple Toeplitz spec".into()).into()),
    }
}

fn to_u64(v: &BigInt) -> Result<u64, Failure> {
    v.to_u64()
        .ok_or_else(|| Error::Range(format!("{v} does not fit in 64 bits")).into())
}

/// Message of the last failing call on this thread, or null. Valid until the next failure.
#[no_mangle]
pub extern "C" fn toepl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn toepl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a JSON spec.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn toepl_spec_from_json(json: *const c_char, out: *mut *mut ToeplSpec) -> ToeplStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let spec = parse_spec_str(text, "<ffi>")?;
        write_out(out, Box::into_raw(Box::new(ToeplSpec(spec))))
    })
}

/// One of the bundled specs: pd, grigorchuk, gen_grigorchuk, nonb, fibonacci.
///
/// # Safety
/// `name` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn toepl_spec_bundled(name: *const c_char, out: *mut *mut ToeplSpec) -> ToeplStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        write_out(out, Box::into_raw(Box::new(ToeplSpec(bundled(name)?))))
    })
}

/// # Safety
/// `spec` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn toepl_spec_free(spec: *mut ToeplSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Writes 1 for a Sturmian spec and 0 for a simple Toeplitz spec.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn toepl_spec_is_sturmian(spec: *const ToeplSpec, out: *mut i32) -> ToeplStatus {
    guard(|| write_out(out, matches!(handle(spec, "spec")?.0, AnySpec::Sturmian(_)) as i32))
}

/// `|p^k|` for `k >= -1`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn toepl_block_len(spec: *const ToeplSpec, k: i64, out: *mut u64) -> ToeplStatus {
    guard(|| {
        let len = coding(handle(spec, "spec")?)?.block_len(k)?;
        write_out(out, to_u64(&BigInt::from(len))?)
    })
}

/// Closed-form factor complexity `p(L)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn toepl_complexity(spec: *const ToeplSpec, l: u64, out: *mut u64) -> ToeplStatus {
    guard(|| {
        let v = complexity_formula(coding(handle(spec, "spec")?)?, &BigInt::from(l))?;
        write_out(out, to_u64(&v.value)?)
    })
}

/// Factor complexity counted from the language, for either kind of spec.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn toepl_complexity_oracle(spec: *const ToeplSpec, l: u64, out: *mut u64) -> ToeplStatus {
    guard(|| {
        let l = usize::try_from(l).map_err(|_| invalid("L too large"))?;
        let idx = match &handle(spec, "spec")?.0 {
            AnySpec::Coding(c) => collect_language(c, l)?,
            AnySpec::Sturmian(s) => collect_sturmian_language(s, l)?,
        };
        write_out(out, idx.complexity(l)?)
    })
}

/// Closed-form palindrome complexity `P(L)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn toepl_palindromes(spec: *const ToeplSpec, l: u64, out: *mut u64) -> ToeplStatus {
    guard(|| {
        let v = palindrome_formula(coding(handle(spec, "spec")?)?, &BigInt::from(l))?;
        write_out(out, to_u64(&v.value)?)
    })
}

/// Closed-form repetitivity `R(L)`; a range error for lengths below the covered range.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn toepl_repetitivity(spec: *const ToeplSpec, l: u64, out: *mut u64) -> ToeplStatus {
    guard(|| {
        let v = repetitivity_formula(coding(handle(spec, "spec")?)?, &BigInt::from(l))?;
        write_out(out, to_u64(&v.value)?)
    })
}

/// de Bruijn graph of length-`L` words in DOT form.
///
/// # Safety
/// Pointers must be valid; free the result with [`toepl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn toepl_debruijn_dot(spec: *const ToeplSpec, l: u64, out: *mut *mut c_char) -> ToeplStatus {
    guard(|| {
        let l = usize::try_from(l).map_err(|_| invalid("L too large"))?;
        let (idx, al) = match &handle(spec, "spec")?.0 {
            AnySpec::Coding(c) => (collect_language(c, l + 1)?, c.alphabet.clone()),
            AnySpec::Sturmian(s) => (collect_sturmian_language(s, l + 1)?, SturmianSpec::alphabet()),
        };
        write_string(out, build_graph(&idx, l)?.to_dot(&al))
    })
}

/// Runs the verification checks; `passed` is 1 when none failed, `report` gets JSON.
/// Either output may be null.
///
/// # Safety
/// `spec` must be valid; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn toepl_verify(
    spec: *const ToeplSpec,
    depth: u32,
    passed: *mut i32,
    report: *mut *mut c_char,
) -> ToeplStatus {
    guard(|| {
        let rep = match &handle(spec, "spec")?.0 {
            AnySpec::Coding(c) => verify_coding(c, depth as usize)?,
            AnySpec::Sturmian(s) => verify_sturmian(s, depth as usize)?,
        };
        if !passed.is_null() {
            passed.write(rep.passed() as i32);
        }
        if !report.is_null() {
            write_string(report, serde_json::to_string(&rep).expect("serializable"))?;
        }
        Ok(())
    })
}

/// Letter potential: `f(x) = f[x]`, `g(x) = g[x]` for letter index `x`. A null `f` means `f = 1`.
///
/// # Safety
/// `g` (and `f` when non-null) must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn toepl_potential_letters(
    f: *const f64,
    g: *const f64,
    len: usize,
    out: *mut *mut ToeplPotential,
) -> ToeplStatus {
    guard(|| {
        if g.is_null() || len == 0 {
            return Err(invalid("g must hold at least one value"));
        }
        let gv = std::slice::from_raw_parts(g, len).to_vec();
        let fp = if f.is_null() {
            PotFn::Const(1.0)
        } else {
            PotFn::Letter(std::slice::from_raw_parts(f, len).to_vec())
        };
        let pot = PotentialSpec::new(0, fp, PotFn::Letter(gv))?;
        write_out(out, Box::into_raw(Box::new(ToeplPotential(pot))))
    })
}

/// # Safety
/// `pot` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn toepl_potential_free(pot: *mut ToeplPotential) {
    if !pot.is_null() {
        drop(Box::from_raw(pot));
    }
}

/// Trace of the transfer matrix over the level-`k` period. `value` may overflow to
/// infinity; `ln_abs` holds `ln |trace|` in full range. Either output may be null.
///
/// # Safety
/// `spec` and `pot` must be valid; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn toepl_trace(
    spec: *const ToeplSpec,
    pot: *const ToeplPotential,
    energy: f64,
    k: i64,
    value: *mut f64,
    ln_abs: *mut f64,
) -> ToeplStatus {
    guard(|| {
        let t = periodic_trace(coding(handle(spec, "spec")?)?, &handle(pot, "potential")?.0, energy, k)?;
        if !value.is_null() {
            value.write(t.to_f64());
        }
        if !ln_abs.is_null() {
            ln_abs.write(t.ln());
        }
        Ok(())
    })
}

/// Lebesgue measure of the level-`k` approximant spectrum found on a grid over `[lo, hi]`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn toepl_spectrum_measure(
    spec: *const ToeplSpec,
    pot: *const ToeplPotential,
    k: i64,
    lo: f64,
    hi: f64,
    grid: usize,
    out: *mut f64,
) -> ToeplStatus {
    guard(|| {
        let iv = spectrum_approx(
            coding(handle(spec, "spec")?)?,
            &handle(pot, "potential")?.0,
            k,
            (lo, hi),
            grid,
            1e-10,
        )?;
        write_out(out, measure(&iv))
    })
}

/// `(1/j) ln ||A(+-j)||` on the leading word centred at letter index `letter`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn toepl_lyapunov(
    spec: *const ToeplSpec,
    pot: *const ToeplPotential,
    letter: u32,
    energy: f64,
    j: u64,
    backward: i32,
    out: *mut f64,
) -> ToeplStatus {
    guard(|| {
        if j == 0 {
            return Err(invalid("j must be positive"));
        }
        let spec = coding(handle(spec, "spec")?)?;
        let pot = handle(pot, "potential")?.0.clone();
        let letter = Letter::try_from(letter).map_err(|_| invalid("letter index too large"))?;
        if letter as usize >= spec.alphabet.len() {
            return Err(invalid("letter index outside the alphabet"));
        }
        let src = leading_source(spec, letter, j + 2 * pot.radius as u64 + 4)?;
        let ctx = TransferContext::new(src, pot, energy);
        let dir = if backward != 0 { Direction::Backward } else { Direction::Forward };
        let seq = lyapunov_sequence(&ctx, j, dir, j)?;
        let last = seq.last().ok_or_else(|| invalid("empty sequence"))?;
        write_out(out, last.1)
    })
}
