use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use sage_ffi::*;

fn last_error() -> String {
    let p = sage_last_error();
    assert!(!p.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(text: &str) -> *mut SageGrid {
    let c = CString::new(text).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { sage_grid_parse(c.as_ptr(), &mut g) }, SageStatus::Ok);
    assert!(sage_last_error().is_null());
    g
}

#[test]
fn grid_handle_round_trip() {
    let g = parse("5 3 0.1\n#####\n#...#\n#####\n");
    let (mut w, mut h, mut r) = (0, 0, 0.0);
    unsafe {
        assert_eq!(sage_grid_size(g, &mut w, &mut h, &mut r), SageStatus::Ok);
        assert_eq!((w, h, r), (5, 3, 0.1));
        let mut d = 0.0;
        assert_eq!(sage_grid_clearance(g, 2, 1, &mut d), SageStatus::Ok);
        assert!((d - 0.1).abs() < 1e-12);
        assert_eq!(sage_grid_clearance(g, 9, 1, &mut d), SageStatus::InvalidArgument);
        assert!(last_error().contains("outside"));
        sage_grid_free(g);
    }
}

#[test]
fn clearance_without_obstacles_is_infinite() {
    let g = parse("2 2 0.5\n..\n..\n");
    let mut d = 0.0;
    unsafe {
        assert_eq!(sage_grid_clearance(g, 0, 0, &mut d), SageStatus::Ok);
        sage_grid_free(g);
    }
    assert!(d.is_infinite());
}

#[test]
fn planning_reports_length_and_disconnection() {
    let g = parse("5 3 0.1\n.....\n.###.\n.....\n");
    let (mut len, mut n) = (0.0, 0);
    unsafe {
        assert_eq!(sage_grid_plan(g, 0, 1, 4, 1, 0.0, &mut len, &mut n), SageStatus::Ok);
        // Around the bar: two diagonals are blocked by corners, so 6 orthogonal steps.
        assert!((len - 0.6).abs() < 1e-9, "{len}");
        assert_eq!(n, 7);
        assert_eq!(sage_grid_plan(g, 0, 1, 4, 1, 5.0, &mut len, &mut n), SageStatus::NotFound);
        assert_eq!(sage_grid_plan(g, 0, 1, 4, 1, f64::NAN, &mut len, &mut n), SageStatus::InvalidArgument);
        sage_grid_free(g);
    }
}

#[test]
fn malformed_input_maps_to_status_codes() {
    let mut g = ptr::null_mut();
    let bad = CString::new("3 1 0.1\n..x\n").unwrap();
    unsafe {
        assert_eq!(sage_grid_parse(bad.as_ptr(), &mut g), SageStatus::Data);
        assert!(g.is_null());
        assert_eq!(sage_grid_parse(ptr::null(), &mut g), SageStatus::NullArgument);
        assert!(last_error().contains("null"));
        assert_eq!(sage_grid_parse(bad.as_ptr(), ptr::null_mut()), SageStatus::NullArgument);
        sage_grid_free(ptr::null_mut());
        sage_store_free(ptr::null_mut());
        assert_eq!(sage_store_len(ptr::null()), 0);
    }
    let invalid_utf8 = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { sage_grid_parse(invalid_utf8.as_ptr().cast(), &mut g) },
        SageStatus::InvalidArgument
    );
}

#[test]
fn maze_generation_is_deterministic() {
    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(sage_grid_maze(7, &mut a), SageStatus::Ok);
        assert_eq!(sage_grid_maze(7, &mut b), SageStatus::Ok);
        let (mut w, mut h, mut r) = (0, 0, 0.0);
        assert_eq!(sage_grid_size(a, &mut w, &mut h, &mut r), SageStatus::Ok);
        for (x, y) in [(1, 1), (w / 2, h / 2), (w - 2, h - 2)] {
            let (mut da, mut db) = (0.0, 0.0);
            sage_grid_clearance(a, x, y, &mut da);
            sage_grid_clearance(b, x, y, &mut db);
            assert_eq!(da, db);
        }
        sage_grid_free(a);
        sage_grid_free(b);
    }
}

#[test]
fn objective_schedule_and_judge() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(sage_aac_objective(2.5, 1.0, true, 0.2, 1.0, &mut v), SageStatus::Ok);
        assert_eq!(v, 2.0);
        assert_eq!(sage_aac_objective(2.5, 1.0, false, 0.2, 1.0, &mut v), SageStatus::Ok);
        assert!((v - 1.2).abs() < 1e-12);
        assert_eq!(sage_aac_objective(0.0, 1.0, false, 0.2, 1.0, &mut v), SageStatus::InvalidArgument);
        assert_eq!(sage_aac_objective(1.0, 1.0, false, 0.2, 0.1, &mut v), SageStatus::InvalidArgument);

        assert_eq!(sage_eta(0.75, 0.8, 0.0, 1.5, &mut v), SageStatus::Ok);
        assert!((v - 0.4).abs() < 1e-12);
        assert_eq!(sage_eta(f64::INFINITY, 0.8, 0.0, 1.5, &mut v), SageStatus::Numeric);
    }
    let (a, t) = (CString::new("Piano.").unwrap(), CString::new("piano").unwrap());
    let mut score = 0u8;
    assert_eq!(unsafe { sage_judge(a.as_ptr(), t.as_ptr(), &mut score) }, SageStatus::Ok);
    assert_eq!(score, 5);
}

#[test]
fn genesis_then_store_lookup() {
    let dir = tempfile::tempdir().unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut accepted = 0;
    assert_eq!(
        unsafe { sage_genesis_run(ptr::null(), out.as_ptr(), 2, 12, 3, &mut accepted) },
        SageStatus::Ok
    );
    assert_eq!(accepted, 12);

    let rules = CString::new(dir.path().join("rules.json").to_str().unwrap()).unwrap();
    let mut store = ptr::null_mut();
    unsafe {
        assert_eq!(sage_store_load(rules.as_ptr(), &mut store), SageStatus::Ok);
        assert!(sage_store_len(store) > 0);
        let (task, scene) = (CString::new("Where is the piano?").unwrap(), CString::new("").unwrap());
        let mut buf = [0 as std::ffi::c_char; 16];
        let mut score = 0.0;
        assert_eq!(
            sage_store_best_rule(store, task.as_ptr(), scene.as_ptr(), buf.as_mut_ptr(), buf.len(), &mut score),
            SageStatus::Ok
        );
        let text = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
        assert_eq!(text.len(), 15, "truncated to capacity - 1");
        assert!(text.starts_with("IF"), "{text}");
        assert!((-1.0..=1.0).contains(&score));
        sage_store_free(store);
    }

    let bad = CString::new("{\"mazes\": \"five\"}").unwrap();
    assert_eq!(
        unsafe { sage_genesis_run(bad.as_ptr(), out.as_ptr(), 1, 1, 1, &mut accepted) },
        SageStatus::InvalidArgument
    );
    let missing = CString::new(dir.path().join("absent.json").to_str().unwrap()).unwrap();
    let mut store = ptr::null_mut();
    assert_eq!(unsafe { sage_store_load(missing.as_ptr(), &mut store) }, SageStatus::Io);
}

#[test]
fn header_declares_every_export_and_compiles_as_c() {
    let header_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/sage.h");
    let header = std::fs::read_to_string(&header_path).unwrap();
    for name in [
        "sage_last_error",
        "sage_grid_parse",
        "sage_grid_maze",
        "sage_grid_free",
        "sage_grid_size",
        "sage_grid_clearance",
        "sage_grid_plan",
        "sage_store_load",
        "sage_store_free",
        "sage_store_len",
        "sage_store_best_rule",
        "sage_aac_objective",
        "sage_eta",
        "sage_judge",
        "sage_genesis_run",
        "SAGE_STATUS_PANIC = 7",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
    // Syntax-check the header with a C compiler when one is installed.
    if let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-std=c99", "-Wall", "-Werror", "-x", "c"])
        .arg(&header_path)
        .status()
    {
        assert!(status.success(), "header does not compile as C99");
    }
}
