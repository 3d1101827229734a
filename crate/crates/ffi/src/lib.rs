//! C interface to `transbem`.
//!
//! Scenes and solutions are opaque heap handles released with the matching
//! `*_free` function. Every fallible call returns a [`TbStatus`]; on failure
//! the message is kept per thread and read with [`tb_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use transbem::analytic::solve_circle;
use transbem::error::{Error, GeometryError};
use transbem::fields::{evaluate_in_domain, Densities};
use transbem::formulations::{build, FormulationKind, FormulationTag, OperatorBlocks};
use transbem::geometry::{locate_point, parse_scene, presets, BoundaryMesh, Scene, Vec2};
use transbem::krylov::{gmres, GmresOptions, SolveReport};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Geometry = 3,
    Assembly = 4,
    Build = 5,
    Spectrum = 6,
    Analytic = 7,
    Field = 8,
    OnBoundary = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

/// A scene with its boundary mesh.
pub struct TbScene {
    scene: Scene,
    mesh: BoundaryMesh,
}

/// A solved system: GMRES report and boundary densities.
pub struct TbSolution {
    scene: Scene,
    mesh: BoundaryMesh,
    densities: Densities,
    report: SolveReport,
    dimension: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: TbStatus,
    message: String,
}

impl Failure {
    fn new(status: TbStatus, message: impl Into<String>) -> Self {
        Failure { status, message: message.into() }
    }

    fn null(what: &str) -> Self {
        Failure::new(TbStatus::NullPointer, format!("{what} is null"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Geometry(GeometryError::OnBoundary { .. }) => TbStatus::OnBoundary,
            Error::Geometry(_) => TbStatus::Geometry,
            Error::SpecFun(_) | Error::Analytic(_) => TbStatus::Analytic,
            Error::Assembly(_) => TbStatus::Assembly,
            Error::Build(_) => TbStatus::Build,
            Error::Spectrum(_) => TbStatus::Spectrum,
            Error::Field(_) => TbStatus::Field,
        };
        Failure::new(status, e.to_string())
    }
}

macro_rules! impl_from_error {
    ($($t:ty),*) => {
        $(impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Error::from(e).into()
            }
        })*
    };
}

impl_from_error!(
    transbem::error::GeometryError,
    transbem::error::AssemblyError,
    transbem::error::BuildError,
    transbem::error::AnalyticError,
    transbem::error::FieldError
);

fn set_last_error(message: Option<String>) {
    let c = message.map(|m| CString::new(m.replace('\0', " ")).expect("interior NULs removed"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

/// Runs `f`, records its error message and converts panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(None);
            TbStatus::Ok
        }
        Ok(Err(failure)) => {
            set_last_error(Some(failure.message));
            failure.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(Some(format!("panic: {msg}")));
            TbStatus::Panic
        }
    }
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn as_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::new(TbStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn emit_scene(scene: Scene, out: *mut *mut TbScene) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    let mesh = BoundaryMesh::from_scene(&scene)?;
    out.write(Box::into_raw(Box::new(TbScene { scene, mesh })));
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length including
/// the terminator, or 0 when the last call succeeded.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn tb_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| match slot.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len);
                std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn tb_status_name(status: TbStatus) -> *const c_char {
    let s: &'static CStr = match status {
        TbStatus::Ok => c"ok",
        TbStatus::NullPointer => c"null pointer",
        TbStatus::InvalidArgument => c"invalid argument",
        TbStatus::Geometry => c"geometry error",
        TbStatus::Assembly => c"assembly error",
        TbStatus::Build => c"formulation error",
        TbStatus::Spectrum => c"spectrum error",
        TbStatus::Analytic => c"series solution error",
        TbStatus::Field => c"field error",
        TbStatus::OnBoundary => c"point on boundary",
        TbStatus::BufferTooSmall => c"buffer too small",
        TbStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Circle of `radius` with material `eps2` inside, `elements` elements.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn tb_scene_circle(
    radius: f64,
    eps2: f64,
    omega: f64,
    elements: usize,
    out: *mut *mut TbScene,
) -> TbStatus {
    guard(|| emit_scene(presets::circle(radius, eps2, omega, elements)?, out))
}

/// Concentric circles; the outer one gets two thirds of `elements`.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn tb_scene_concentric(
    r_inner: f64,
    r_outer: f64,
    eps2: f64,
    eps3: f64,
    omega: f64,
    elements: usize,
    out: *mut *mut TbScene,
) -> TbStatus {
    guard(|| emit_scene(presets::concentric(r_inner, r_outer, eps2, eps3, omega, elements)?, out))
}

/// Scene from a TOML description (NUL-terminated UTF-8).
///
/// # Safety
/// `toml` must be a valid C string; `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn tb_scene_from_toml(toml: *const c_char, out: *mut *mut TbScene) -> TbStatus {
    guard(|| emit_scene(parse_scene(as_str(toml, "toml")?)?, out))
}

/// Total number of boundary elements.
///
/// # Safety
/// `scene` must come from a `tb_scene_*` constructor; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tb_scene_element_count(scene: *const TbScene, out: *mut usize) -> TbStatus {
    guard(|| write_out(out, as_ref(scene, "scene")?.mesh.len(), "out"))
}

/// Domain containing `(x, y)` (1 is the host).
///
/// # Safety
/// `scene` must come from a `tb_scene_*` constructor; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tb_scene_locate(scene: *const TbScene, x: f64, y: f64, out: *mut u32) -> TbStatus {
    guard(|| {
        let s = as_ref(scene, "scene")?;
        write_out(out, locate_point(&s.scene, &s.mesh, Vec2::new(x, y))?, "out")
    })
}

/// Releases a scene. Null is ignored.
///
/// # Safety
/// `scene` must be null or come from a `tb_scene_*` constructor and not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tb_scene_free(scene: *mut TbScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Assembles and solves the formulation named `formulation` (for example
/// `"calderon-bm-minus-alpha"` or `"recipe"`) with GMRES at relative
/// tolerance `tol`; `max_iter = 0` means the system dimension. A solve that
/// stops without converging still returns `TB_STATUS_OK`; query
/// [`tb_solution_converged`].
///
/// # Safety
/// `scene` must be a live scene handle, `formulation` a valid C string and
/// `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn tb_solve(
    scene: *const TbScene,
    formulation: *const c_char,
    tol: f64,
    max_iter: usize,
    out: *mut *mut TbSolution,
) -> TbStatus {
    guard(|| {
        let s = as_ref(scene, "scene")?;
        let tag: FormulationTag = as_str(formulation, "formulation")?.parse()?;
        if !(tol > 0.0) {
            return Err(Failure::new(TbStatus::InvalidArgument, format!("tolerance must be positive, got {tol}")));
        }
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let blocks = OperatorBlocks::assemble(&s.scene, &s.mesh)?;
        let system = build(FormulationKind::new(tag), &s.scene, &s.mesh, &blocks)?;
        let opts = GmresOptions { tol, max_iter: (max_iter > 0).then_some(max_iter) };
        let report = gmres(&system, opts);
        let densities = Densities::from_solution(&system, &s.mesh, &report.solution)?;
        let solution = TbSolution {
            scene: s.scene.clone(),
            mesh: s.mesh.clone(),
            densities,
            report,
            dimension: system.dim(),
        };
        out.write(Box::into_raw(Box::new(solution)));
        Ok(())
    })
}

/// GMRES iteration count.
///
/// # Safety
/// `solution` must be a live solution handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tb_solution_iterations(solution: *const TbSolution, out: *mut usize) -> TbStatus {
    guard(|| write_out(out, as_ref(solution, "solution")?.report.iterations, "out"))
}

/// Whether GMRES reached the tolerance.
///
/// # Safety
/// `solution` must be a live solution handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tb_solution_converged(solution: *const TbSolution, out: *mut bool) -> TbStatus {
    guard(|| write_out(out, as_ref(solution, "solution")?.report.converged, "out"))
}

/// Relative residual `‖b - A y‖ / ‖b‖` of the returned solution.
///
/// # Safety
/// `solution` must be a live solution handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tb_solution_residual(solution: *const TbSolution, out: *mut f64) -> TbStatus {
    guard(|| write_out(out, as_ref(solution, "solution")?.report.true_residual, "out"))
}

/// Dimension of the solved system.
///
/// # Safety
/// `solution` must be a live solution handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tb_solution_dimension(solution: *const TbSolution, out: *mut usize) -> TbStatus {
    guard(|| write_out(out, as_ref(solution, "solution")?.dimension, "out"))
}

/// Copies the boundary densities in mesh element order as interleaved
/// `re, im` pairs; `u` and `w` must each hold `2 * elements` doubles.
///
/// # Safety
/// `solution` must be a live solution handle; `u` and `w` must be valid for
/// `2 * elements` writes.
#[no_mangle]
pub unsafe extern "C" fn tb_solution_densities(
    solution: *const TbSolution,
    u: *mut f64,
    w: *mut f64,
    elements: usize,
) -> TbStatus {
    guard(|| {
        let s = as_ref(solution, "solution")?;
        if u.is_null() || w.is_null() {
            return Err(Failure::null("density buffer"));
        }
        let n = s.mesh.len();
        if elements < n {
            return Err(Failure::new(TbStatus::BufferTooSmall, format!("need {n} elements, got {elements}")));
        }
        for (src, dst) in [(&s.densities.u, u), (&s.densities.w, w)] {
            for (i, z) in src.iter().enumerate() {
                *dst.add(2 * i) = z.re;
                *dst.add(2 * i + 1) = z.im;
            }
        }
        Ok(())
    })
}

/// Total field at `(x, y)` from the boundary densities.
///
/// # Safety
/// `solution` must be a live solution handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tb_solution_field(
    solution: *const TbSolution,
    x: f64,
    y: f64,
    re: *mut f64,
    im: *mut f64,
) -> TbStatus {
    guard(|| {
        let s = as_ref(solution, "solution")?;
        let p = Vec2::new(x, y);
        let domain = locate_point(&s.scene, &s.mesh, p)?;
        let z = evaluate_in_domain(&s.scene, &s.mesh, &s.densities, domain, p);
        write_complex(re, im, z)
    })
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `solution` must be null or come from [`tb_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tb_solution_free(solution: *mut TbSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Series solution for a circle of `radius` and material `eps2` under the
/// unit plane wave along `+x`, evaluated at `(x, y)`.
///
/// # Safety
/// `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tb_series_circle(
    radius: f64,
    eps2: f64,
    omega: f64,
    truncation: usize,
    x: f64,
    y: f64,
    re: *mut f64,
    im: *mut f64,
) -> TbStatus {
    guard(|| {
        let series = solve_circle(radius, eps2, omega, truncation)?;
        write_complex(re, im, series.evaluate(Vec2::new(x, y)))
    })
}

unsafe fn write_complex(re: *mut f64, im: *mut f64, z: Complex64) -> Result<(), Failure> {
    if re.is_null() || im.is_null() {
        return Err(Failure::null("output"));
    }
    re.write(z.re);
    im.write(z.im);
    Ok(())
}
