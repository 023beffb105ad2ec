//! C ABI over `rismod`.
//!
//! Every fallible call returns a [`RismodStatus`]; on failure the message is
//! kept per thread and read with [`rismod_last_error`]. Handles are opaque and
//! must be released with their `_free` function. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use rismod::analysis::{dcmc_capacity_gh, mean_constellation, sep_apsk_theory, sep_qapsk_theory};
use rismod::config::{run_job, JobConfig, JobKind};
use rismod::detection::Detector;
use rismod::quadrature::GaussHermite;
use rismod::special::laguerre_half;
use rismod::{
    draw_channel, equivalent_link, partition_blocks, quantize_phase, received_signal_set,
    ConstellationSet, Error, LinkConfig, RngStream, SchemeConfig,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RismodStatus {
    Ok = 0,
    ConfigError = 1,
    NumericalError = 2,
    UndefinedPhase = 3,
    SchemaError = 4,
    IoError = 5,
    NullPointer = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RismodScheme {
    Psk = 0,
    Apsk = 1,
    Qapsk = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RismodJob {
    Constellation = 0,
    Capacity = 1,
    Sep = 2,
    Theory = 3,
}

/// Link parameters. `aoa_phi` in radians, `ra_spacing_over_lambda` is `d/λ`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RismodLink {
    pub elements: usize,
    pub rx_antennas: usize,
    pub kappa: f64,
    pub phase_bits: u32,
    pub ra_spacing_over_lambda: f64,
    pub aoa_phi: f64,
    pub rho: f64,
}

/// Opaque received constellation.
pub struct RismodConstellation {
    inner: ConstellationSet,
}

/// Opaque CSV artifact.
pub struct RismodArtifact {
    csv: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RismodStatus {
    match e {
        Error::Config(_) => RismodStatus::ConfigError,
        Error::Numerical(_) => RismodStatus::NumericalError,
        Error::UndefinedPhase => RismodStatus::UndefinedPhase,
        Error::Schema(_) => RismodStatus::SchemaError,
        Error::Io(_) => RismodStatus::IoError,
    }
}

enum Fail {
    Core(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RismodStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RismodStatus::Ok
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            RismodStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic".into());
            RismodStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or valid and writable for `'a`.
unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    unsafe { p.as_mut() }.ok_or(Fail::Null(what))
}

/// # Safety
/// `p` is null or points to `len` readable elements that live for `'a`.
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn link_of(l: &RismodLink) -> LinkConfig {
    LinkConfig {
        elements: l.elements,
        rx_antennas: l.rx_antennas,
        kappa: l.kappa,
        phase_bits: l.phase_bits,
        ra_spacing_over_lambda: l.ra_spacing_over_lambda,
        aoa_phi: l.aoa_phi,
        rho: l.rho,
    }
}

fn scheme_of(kind: RismodScheme, m: usize, v: usize) -> SchemeConfig {
    match kind {
        RismodScheme::Psk => SchemeConfig::psk(m),
        RismodScheme::Apsk => SchemeConfig::apsk(m, v),
        RismodScheme::Qapsk => SchemeConfig::qapsk(m, v),
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next `rismod_*` call on the same thread.
#[no_mangle]
pub extern "C" fn rismod_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, a static nul-terminated string.
#[no_mangle]
pub extern "C" fn rismod_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Fills `link` with defaults: `d/λ = 0.5`, `φ = 0`, `ρ = 1`.
///
/// # Safety
/// Pointer arguments must be null or valid for the access described above.
#[no_mangle]
pub unsafe extern "C" fn rismod_link_default(
    elements: usize,
    rx_antennas: usize,
    kappa: f64,
    phase_bits: u32,
    link: *mut RismodLink,
) -> RismodStatus {
    guard(|| {
        let l = LinkConfig::new(elements, rx_antennas, kappa, phase_bits);
        *out_ref(link, "link")? = RismodLink {
            elements: l.elements,
            rx_antennas: l.rx_antennas,
            kappa: l.kappa,
            phase_bits: l.phase_bits,
            ra_spacing_over_lambda: l.ra_spacing_over_lambda,
            aoa_phi: l.aoa_phi,
            rho: l.rho,
        };
        Ok(())
    })
}

/// `ρ′` and `κ′` of the single-antenna equivalent link.
///
/// # Safety
/// Pointer arguments must be null or valid for the access described above.
#[no_mangle]
pub unsafe extern "C" fn rismod_equivalent_link(
    link: *const RismodLink,
    rho_prime: *mut f64,
    kappa_prime: *mut f64,
) -> RismodStatus {
    guard(|| {
        // SAFETY: null or a valid RismodLink.
        let l = unsafe { link.as_ref() }.ok_or(Fail::Null("link"))?;
        let e = equivalent_link(&link_of(l))?;
        *out_ref(rho_prime, "rho_prime")? = e.rho_prime;
        *out_ref(kappa_prime, "kappa_prime")? = e.kappa_prime;
        Ok(())
    })
}

/// Grid index of the `bits`-bit phase nearest to `arg(re + j·im)`.
///
/// # Safety
/// Pointer arguments must be null or valid for the access described above.
#[no_mangle]
pub unsafe extern "C" fn rismod_quantize_phase(
    re: f64,
    im: f64,
    bits: u32,
    index: *mut u32,
) -> RismodStatus {
    guard(|| {
        let q = quantize_phase(Complex64::new(re, im), bits)?;
        *out_ref(index, "index")? = q.index();
        Ok(())
    })
}

/// `L_{1/2}(−x)` for `x >= 0`.
///
/// # Safety
/// Pointer arguments must be null or valid for the access described above.
#[no_mangle]
pub unsafe extern "C" fn rismod_laguerre_half(x: f64, out: *mut f64) -> RismodStatus {
    guard(|| {
        *out_ref(out, "out")? = laguerre_half(x)?;
        Ok(())
    })
}

/// A-PSK SEP approximation from `m / v` real block gains.
///
/// # Safety
/// Pointer arguments must be null or valid for the access described above.
#[no_mangle]
pub unsafe extern "C" fn rismod_sep_apsk_theory(
    gains: *const f64,
    len: usize,
    rho_prime: f64,
    m: usize,
    v: usize,
    out: *mut f64,
) -> RismodStatus {
    guard(|| {
        let x = slice(gains, len, "gains")?;
        *out_ref(out, "out")? = sep_apsk_theory(x, rho_prime, m, v)?;
        Ok(())
    })
}

/// QA-PSK SEP approximation from `len = sqrt(m / v)` gains per branch.
///
/// # Safety
/// Pointer arguments must be null or valid for the access described above.
#[no_mangle]
pub unsafe extern "C" fn rismod_sep_qapsk_theory(
    gains_i: *const f64,
    gains_q: *const f64,
    len: usize,
    rho_prime: f64,
    m: usize,
    v: usize,
    out: *mut f64,
) -> RismodStatus {
    guard(|| {
        let xi = slice(gains_i, len, "gains_i")?;
        let xq = slice(gains_q, len, "gains_q")?;
        *out_ref(out, "out")? = sep_qapsk_theory(xi, xq, rho_prime, m, v)?;
        Ok(())
    })
}

/// Constellation of channel `channel_index` drawn from `seed`. `v` is ignored
/// for PSK.
///
/// # Safety
/// Pointer arguments must be null or valid for the access described above.
#[no_mangle]
pub unsafe extern "C" fn rismod_constellation_draw(
    link: *const RismodLink,
    scheme: RismodScheme,
    m: usize,
    v: usize,
    seed: u64,
    channel_index: u64,
    out: *mut *mut RismodConstellation,
) -> RismodStatus {
    guard(|| {
        // SAFETY: null or a valid RismodLink.
        let l = link_of(unsafe { link.as_ref() }.ok_or(Fail::Null("link"))?);
        let slot = out_ref(out, "out")?;
        let s = scheme_of(scheme, m, v);
        let part = partition_blocks(l.elements, &s)?;
        let stream = RngStream::derive(seed, rismod::rng::tags::CHANNEL, &[channel_index]);
        let g = draw_channel(&l, stream)?.equivalent_gains();
        let inner = received_signal_set(&g, &s, &part, l.phase_bits)?;
        *slot = Box::into_raw(Box::new(RismodConstellation { inner }));
        Ok(())
    })
}

/// Constellation built from the mean block gains of `link`.
///
/// # Safety
/// Pointer arguments must be null or valid for the access described above.
#[no_mangle]
pub unsafe extern "C" fn rismod_constellation_mean(
    link: *const RismodLink,
    scheme: RismodScheme,
    m: usize,
    v: usize,
    out: *mut *mut RismodConstellation,
) -> RismodStatus {
    guard(|| {
        // SAFETY: null or a valid RismodLink.
        let l = link_of(unsafe { link.as_ref() }.ok_or(Fail::Null("link"))?);
        let slot = out_ref(out, "out")?;
        let kp = equivalent_link(&l)?.kappa_prime;
        let inner = mean_constellation(&scheme_of(scheme, m, v), l.elements, l.phase_bits, kp)?;
        *slot = Box::into_raw(Box::new(RismodConstellation { inner }));
        Ok(())
    })
}

fn handle<'a>(c: *const RismodConstellation) -> Result<&'a ConstellationSet, Fail> {
    // SAFETY: null or a live handle from rismod_constellation_*.
    Ok(&unsafe { c.as_ref() }
        .ok_or(Fail::Null("constellation"))?
        .inner)
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// Pointer arguments must be null or valid for the access described above.
#[no_mangle]
pub unsafe extern "C" fn rismod_constellation_len(c: *const RismodConstellation) -> usize {
    handle(c).map_or(0, |c| c.len())
}

/// Copies the points into `re[0..cap]` and `im[0..cap]`; `cap` must be at
/// least the constellation size.
///
/// # Safety
/// Pointer arguments must be null or valid for the access described above.
#[no_mangle]
pub unsafe extern "C" fn rismod_constellation_points(
    c: *const RismodConstellation,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
) -> RismodStatus {
    guard(|| {
        let c = handle(c)?;
        if cap < c.len() {
            return Err(
                Error::Config(format!("buffer holds {cap} points, need {}", c.len())).into(),
            );
        }
        if re.is_null() || im.is_null() {
            return Err(Fail::Null("re/im"));
        }
        // SAFETY: non-null with `cap >= len` writable elements each.
        let (re, im) = unsafe {
            (
                std::slice::from_raw_parts_mut(re, cap),
                std::slice::from_raw_parts_mut(im, cap),
            )
        };
        for (k, z) in c.points.iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        Ok(())
    })
}

/// ML decision for `y` observed at equivalent SNR `rho_prime`.
///
/// # Safety
/// Pointer arguments must be null or valid for the access described above.
#[no_mangle]
pub unsafe extern "C" fn rismod_constellation_detect(
    c: *const RismodConstellation,
    y_re: f64,
    y_im: f64,
    rho_prime: f64,
    index: *mut usize,
) -> RismodStatus {
    guard(|| {
        let c = handle(c)?;
        *out_ref(index, "index")? = Detector::new(c, rho_prime)
            .detect(Complex64::new(y_re, y_im))
            .0;
        Ok(())
    })
}

/// Gauss-Hermite DCMC capacity in bits.
///
/// # Safety
/// Pointer arguments must be null or valid for the access described above.
#[no_mangle]
pub unsafe extern "C" fn rismod_constellation_capacity(
    c: *const RismodConstellation,
    rho_prime: f64,
    gh_order: usize,
    bits: *mut f64,
) -> RismodStatus {
    guard(|| {
        let c = handle(c)?;
        let rule = GaussHermite::new(gh_order)?;
        *out_ref(bits, "bits")? = dcmc_capacity_gh(&c.points, rho_prime, &rule)?;
        Ok(())
    })
}

/// Releases the handle.
///
/// # Safety
/// The handle must come from this library and not be used afterwards; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn rismod_constellation_free(c: *mut RismodConstellation) {
    if !c.is_null() {
        // SAFETY: created by Box::into_raw in this crate and freed once.
        drop(unsafe { Box::from_raw(c) });
    }
}

/// Runs a job from a JSON config and returns its CSV artifact.
///
/// # Safety
/// Pointer arguments must be null or valid for the access described above.
#[no_mangle]
pub unsafe extern "C" fn rismod_run_job(
    job: RismodJob,
    config_json: *const c_char,
    workers: usize,
    out: *mut *mut RismodArtifact,
) -> RismodStatus {
    guard(|| {
        if config_json.is_null() {
            return Err(Fail::Null("config_json"));
        }
        // SAFETY: non-null, nul-terminated per the contract.
        let text = unsafe { CStr::from_ptr(config_json) }
            .to_str()
            .map_err(|e| Error::Config(format!("config is not UTF-8: {e}")))?;
        let slot = out_ref(out, "out")?;
        let kind = match job {
            RismodJob::Constellation => JobKind::Constellation,
            RismodJob::Capacity => JobKind::Capacity,
            RismodJob::Sep => JobKind::Sep,
            RismodJob::Theory => JobKind::Theory,
        };
        if workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()).into());
        }
        let cfg = JobConfig::from_json(text)?;
        let csv = run_job(kind, &cfg, workers)?;
        let csv = CString::new(csv).map_err(|e| Error::Io(e.to_string()))?;
        *slot = Box::into_raw(Box::new(RismodArtifact { csv }));
        Ok(())
    })
}

/// CSV text of an artifact; valid while the handle lives.
///
/// # Safety
/// Pointer arguments must be null or valid for the access described above.
#[no_mangle]
pub unsafe extern "C" fn rismod_artifact_csv(a: *const RismodArtifact) -> *const c_char {
    // SAFETY: null or a live handle from rismod_run_job.
    unsafe { a.as_ref() }.map_or(ptr::null(), |a| a.csv.as_ptr())
}

/// Releases the handle.
///
/// # Safety
/// The handle must come from this library and not be used afterwards; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn rismod_artifact_free(a: *mut RismodArtifact) {
    if !a.is_null() {
        // SAFETY: created by Box::into_raw in this crate and freed once.
        drop(unsafe { Box::from_raw(a) });
    }
}
