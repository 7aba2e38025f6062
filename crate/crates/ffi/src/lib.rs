//! C ABI over `sage-core`.
//!
//! Objects cross the boundary as opaque handles created by `sage_grid_parse`,
//! `sage_grid_maze` or `sage_store_load` and released with the matching `_free`. Every fallible call returns a
//! [`SageStatus`]; on failure, [`sage_last_error`] describes what went wrong on the
//! calling thread. Panics never unwind into C: they are caught and reported as
//! [`SageStatus::Panic`].

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use sage_core::cli::{cmd_genesis, input_grids, CliError, DataLayout, RunConfig};
use sage_core::evolution::{aac_objective, eta_schedule, EvolutionConfig};
use sage_core::experience::ExperienceStore;
use sage_core::gridworld::{compute_distance_field, generate_maze, safe_space, Cell, DistanceField, MazeSpec, OccupancyGrid};
use sage_core::metrics::reference_judge;
use sage_core::planner::astar;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SageStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument was out of range, not UTF-8 or otherwise malformed.
    InvalidArgument = 2,
    /// A file could not be read or written.
    Io = 3,
    /// Input data failed to parse or validate.
    Data = 4,
    /// No path or no result exists.
    NotFound = 5,
    /// A computation produced a non-finite value.
    Numeric = 6,
    /// Internal panic; the handle arguments should be considered unusable.
    Panic = 7,
}

struct Failure(SageStatus, String);

impl Failure {
    fn invalid(msg: impl Into<String>) -> Self {
        Failure(SageStatus::InvalidArgument, msg.into())
    }
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = match e {
            CliError::Usage(_) => SageStatus::InvalidArgument,
            CliError::Data(_) => SageStatus::Data,
            CliError::Numeric(_) => SageStatus::Numeric,
        };
        Failure(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs were replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SageStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SageStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {msg}"));
            SageStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(SageStatus::NullArgument, format!("{name} is null")))
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(SageStatus::NullArgument, format!("{name} is null")))
}

unsafe fn utf8<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SageStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::invalid(format!("{name} is not UTF-8")))
}

/// Message for the last failed call on this thread, or null after a successful call.
/// The pointer stays valid until the next `sage_*` call on the same thread.
#[no_mangle]
pub extern "C" fn sage_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// An occupancy grid with its distance field.
pub struct SageGrid {
    grid: OccupancyGrid,
    field: DistanceField,
}

impl SageGrid {
    fn new(grid: OccupancyGrid) -> *mut SageGrid {
        let field = compute_distance_field(&grid);
        Box::into_raw(Box::new(SageGrid { grid, field }))
    }

    fn cell(&self, x: usize, y: usize) -> Result<Cell, Failure> {
        if x < self.grid.width() && y < self.grid.height() {
            Ok(Cell::new(x, y))
        } else {
            Err(Failure::invalid(format!("cell ({x}, {y}) outside the grid")))
        }
    }
}

/// Parses a grid in the text format: a `W H RESOLUTION` header, then `H` rows of `W` characters.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sage_grid_parse(text: *const c_char, out: *mut *mut SageGrid) -> SageStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let grid = OccupancyGrid::parse(utf8(text, "text")?).map_err(|e| Failure(SageStatus::Data, e.to_string()))?;
        *out = SageGrid::new(grid);
        Ok(())
    })
}

/// Generates the default-size procedural maze for `seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sage_grid_maze(seed: u64, out: *mut *mut SageGrid) -> SageStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let grid = generate_maze(&MazeSpec::default(), seed).map_err(|e| Failure(SageStatus::Data, e.to_string()))?;
        *out = SageGrid::new(grid);
        Ok(())
    })
}

/// Releases a grid. Null is ignored.
///
/// # Safety
/// `grid` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sage_grid_free(grid: *mut SageGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Width and height in cells and the cell size in meters.
///
/// # Safety
/// `grid` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sage_grid_size(
    grid: *const SageGrid,
    width: *mut usize,
    height: *mut usize,
    resolution: *mut f64,
) -> SageStatus {
    guard(|| {
        let g = borrow(grid, "grid")?;
        *out_ref(width, "width")? = g.grid.width();
        *out_ref(height, "height")? = g.grid.height();
        *out_ref(resolution, "resolution")? = g.grid.resolution();
        Ok(())
    })
}

/// Distance in meters from cell `(x, y)` to the nearest obstacle; +infinity without obstacles.
///
/// # Safety
/// `grid` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sage_grid_clearance(grid: *const SageGrid, x: usize, y: usize, out: *mut f64) -> SageStatus {
    guard(|| {
        let g = borrow(grid, "grid")?;
        let cell = g.cell(x, y)?;
        *out_ref(out, "out")? = g.field.meters(cell);
        Ok(())
    })
}

/// Shortest 8-connected path over cells with clearance of at least `delta_cells`.
/// Writes the path length in meters and the number of cells on it.
///
/// # Safety
/// `grid` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sage_grid_plan(
    grid: *const SageGrid,
    start_x: usize,
    start_y: usize,
    goal_x: usize,
    goal_y: usize,
    delta_cells: f64,
    length: *mut f64,
    cells: *mut usize,
) -> SageStatus {
    guard(|| {
        let g = borrow(grid, "grid")?;
        let (length, cells) = (out_ref(length, "length")?, out_ref(cells, "cells")?);
        if delta_cells.is_nan() || delta_cells < 0.0 {
            return Err(Failure::invalid("delta_cells must be non-negative"));
        }
        let (start, goal) = (g.cell(start_x, start_y)?, g.cell(goal_x, goal_y)?);
        let safe: BTreeSet<Cell> = safe_space(&g.grid, &g.field, delta_cells);
        let path = astar(&g.grid, &safe, start, goal).map_err(|e| Failure(SageStatus::NotFound, e.to_string()))?;
        *length = path.length;
        *cells = path.cells.len();
        Ok(())
    })
}

/// A loaded experience store.
pub struct SageStore {
    store: ExperienceStore,
}

/// Loads a rule store written by `genesis` or `evolve`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sage_store_load(path: *const c_char, out: *mut *mut SageStore) -> SageStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let store = ExperienceStore::load(utf8(path, "path")?).map_err(|e| Failure(SageStatus::Io, e.to_string()))?;
        *out = Box::into_raw(Box::new(SageStore { store }));
        Ok(())
    })
}

/// Releases a store. Null is ignored.
///
/// # Safety
/// `store` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sage_store_free(store: *mut SageStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Number of rules in the store, or 0 for a null handle.
///
/// # Safety
/// `store` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sage_store_len(store: *const SageStore) -> usize {
    store.as_ref().map_or(0, |s| s.store.len())
}

/// Copies the best-matching rule's full text into `buf` (NUL-terminated, truncated to
/// `capacity`) and writes its cosine score. Returns `NotFound` on an empty store.
///
/// # Safety
/// `store` must be a live handle, `task` and `scene` NUL-terminated strings, `buf`
/// writable for `capacity` bytes and `score` writable.
#[no_mangle]
pub unsafe extern "C" fn sage_store_best_rule(
    store: *const SageStore,
    task: *const c_char,
    scene: *const c_char,
    buf: *mut c_char,
    capacity: usize,
    score: *mut f64,
) -> SageStatus {
    guard(|| {
        let s = borrow(store, "store")?;
        let score = out_ref(score, "score")?;
        if buf.is_null() || capacity == 0 {
            return Err(Failure(SageStatus::NullArgument, "buf is null or empty".into()));
        }
        let ctx = s
            .store
            .retrieve(utf8(task, "task")?, utf8(scene, "scene")?, 1)
            .map_err(|e| Failure(SageStatus::Data, e.to_string()))?;
        let (rule, cos) = ctx
            .rules
            .first()
            .ok_or_else(|| Failure(SageStatus::NotFound, "store is empty".into()))?;
        let bytes = rule.full_text.as_bytes();
        let n = bytes.len().min(capacity - 1);
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
        *score = *cos;
        Ok(())
    })
}

/// Clipped surrogate for one sample: shared lower bound `1 - eps_std`, upper bound
/// `1 + eps_exp` for experience-augmented samples and `1 + eps_std` otherwise.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sage_aac_objective(
    rho: f64,
    advantage: f64,
    augmented: bool,
    eps_std: f64,
    eps_exp: f64,
    out: *mut f64,
) -> SageStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let cfg = EvolutionConfig {
            eps_std,
            eps_exp,
            ..EvolutionConfig::default()
        };
        cfg.validate().map_err(|e| Failure::invalid(e.to_string()))?;
        if !(rho > 0.0 && rho.is_finite() && advantage.is_finite()) {
            return Err(Failure::invalid("rho must be positive and finite, advantage finite"));
        }
        *out = aac_objective(rho, advantage, augmented, &cfg);
        Ok(())
    })
}

/// Injection probability for a best validation reward `r_val`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sage_eta(r_val: f64, eta_init: f64, eta_min: f64, r_target: f64, out: *mut f64) -> SageStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let cfg = EvolutionConfig {
            eta_init,
            eta_min,
            r_target,
            ..EvolutionConfig::default()
        };
        cfg.validate().map_err(|e| Failure::invalid(e.to_string()))?;
        if !r_val.is_finite() {
            return Err(Failure(SageStatus::Numeric, "r_val is not finite".into()));
        }
        *out = eta_schedule(r_val, &cfg);
        Ok(())
    })
}

/// Rubric judge score (1..5) of `answer` against `truth`.
///
/// # Safety
/// Both strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sage_judge(answer: *const c_char, truth: *const c_char, out: *mut u8) -> SageStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = reference_judge(utf8(answer, "answer")?, utf8(truth, "truth")?).raw();
        Ok(())
    })
}

/// Runs task synthesis into `out_dir`, exactly as the `genesis` command does.
/// `config_json` may be null for the defaults; `procedural_mazes` overrides the maze
/// count and `n_tasks` the total task count. Writes the accepted count to `accepted`.
///
/// # Safety
/// `config_json` must be null or NUL-terminated, `out_dir` NUL-terminated and
/// `accepted` writable.
#[no_mangle]
pub unsafe extern "C" fn sage_genesis_run(
    config_json: *const c_char,
    out_dir: *const c_char,
    procedural_mazes: usize,
    n_tasks: usize,
    seed: u64,
    accepted: *mut usize,
) -> SageStatus {
    guard(|| {
        let accepted = out_ref(accepted, "accepted")?;
        let mut cfg = if config_json.is_null() {
            RunConfig::default()
        } else {
            RunConfig::from_json(utf8(config_json, "config_json")?)?
        };
        cfg.mazes = procedural_mazes;
        cfg.genesis.n_tasks = n_tasks;
        cfg.master_seed = seed;
        let grids = input_grids(&cfg, &[])?;
        let stats = cmd_genesis(&cfg, &grids, &DataLayout::in_dir(Path::new(utf8(out_dir, "out_dir")?)))?;
        *accepted = stats.total.accepted;
        Ok(())
    })
}
