use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use bolab_ffi::*;

fn grid(n: usize, l: f64) -> *mut BolabGrid {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { bolab_grid_new(n, l, &mut g) }, BolabStatus::Ok);
    g
}

fn field(g: *const BolabGrid, f: impl Fn(f64) -> f64) -> *mut BolabField {
    let n = unsafe { bolab_grid_n_points(g) };
    let l = 2.0 * std::f64::consts::PI;
    let xs: Vec<f64> = (0..n).map(|j| f(-l / 2.0 + j as f64 * l / n as f64)).collect();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { bolab_field_from_real(g, xs.as_ptr(), n, &mut out) }, BolabStatus::Ok);
    out
}

fn values(f: *const BolabField, n: usize) -> Vec<f64> {
    let mut buf = vec![0.0; 2 * n];
    assert_eq!(unsafe { bolab_field_values(f, buf.as_mut_ptr(), buf.len()) }, BolabStatus::Ok);
    buf
}

fn last_error() -> String {
    let p = bolab_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn hilbert_of_cosine_is_sine() {
    let n = 64;
    let g = grid(n, 2.0 * std::f64::consts::PI);
    let f = field(g, f64::cos);
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { bolab_hilbert(f, &mut h) }, BolabStatus::Ok);
    let v = values(h, n);
    let l = 2.0 * std::f64::consts::PI;
    for j in 0..n {
        let x = -l / 2.0 + j as f64 * l / n as f64;
        assert!((v[2 * j] - x.sin()).abs() < 1e-12 && v[2 * j + 1].abs() < 1e-12);
    }
    unsafe {
        bolab_field_free(h);
        bolab_field_free(f);
        bolab_grid_free(g);
    }
}

#[test]
fn status_codes_and_messages() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { bolab_grid_new(0, 1.0, &mut g) }, BolabStatus::InvalidArgument);
    assert!(g.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { bolab_grid_new(8, 1.0, ptr::null_mut()) }, BolabStatus::NullPointer);

    let g = grid(32, 2.0 * std::f64::consts::PI);
    let f = field(g, |x| 1.0 + x.cos());
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { bolab_fractional_derivative(f, -0.5, &mut out) }, BolabStatus::NonzeroMean);
    assert!(out.is_null());
    assert!(last_error().contains("mean"));

    let mut small = [0.0; 4];
    assert_eq!(unsafe { bolab_field_coeffs(f, small.as_mut_ptr(), small.len()) }, BolabStatus::BufferTooSmall);
    let short = [0.0; 3];
    assert_eq!(unsafe { bolab_field_from_real(g, short.as_ptr(), 3, &mut out) }, BolabStatus::InvalidArgument);
    unsafe {
        bolab_field_free(f);
        bolab_grid_free(g);
        bolab_field_free(ptr::null_mut());
        bolab_grid_free(ptr::null_mut());
    }
}

#[test]
fn projections_and_norms() {
    let n = 64;
    let g = grid(n, 2.0 * std::f64::consts::PI);
    let f = field(g, |x| (3.0 * x).cos());
    let mut plus = ptr::null_mut();
    let mut minus = ptr::null_mut();
    unsafe {
        assert_eq!(bolab_project_half_line(f, BolabHalfLine::Plus, &mut plus), BolabStatus::Ok);
        assert_eq!(bolab_project_half_line(f, BolabHalfLine::Minus, &mut minus), BolabStatus::Ok);
    }
    let (p, m, v) = (values(plus, n), values(minus, n), values(f, n));
    for i in 0..2 * n {
        assert!((p[i] + m[i] - v[i]).abs() < 1e-12);
    }
    let mut norm = 0.0;
    unsafe {
        assert_eq!(bolab_sobolev_norm(f, 1.0, true, &mut norm), BolabStatus::Ok);
    }
    // ‖cos 3x‖_{L²} = √π on [-π, π]; the Ḣ¹ weight is 3
    assert!((norm - 3.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    let mut low = ptr::null_mut();
    let mut evolved = ptr::null_mut();
    let mut block = ptr::null_mut();
    unsafe {
        assert_eq!(bolab_lowpass_p0(f, &mut low), BolabStatus::Ok);
        assert_eq!(bolab_free_evolve(f, 0.3, &mut evolved), BolabStatus::Ok);
        assert_eq!(bolab_lp_block(f, 1, &mut block), BolabStatus::Ok);
        let mut a = 0.0;
        let mut b = 0.0;
        bolab_sobolev_norm(evolved, 0.0, false, &mut a);
        bolab_sobolev_norm(f, 0.0, false, &mut b);
        assert!((a - b).abs() < 1e-12);
        for h in [plus, minus, low, evolved, block, f] {
            bolab_field_free(h);
        }
        bolab_grid_free(g);
    }
}

#[test]
fn scalar_helpers() {
    assert!(bolab_is_one_admissible(0.0, 6.0, 6.0));
    assert!(bolab_is_one_admissible(0.5, f64::INFINITY, 2.0));
    assert!(!bolab_is_one_admissible(0.0, 3.0, 6.0));
    assert_eq!(bolab_illposed_phase(4.0, 3.0, 2.0, 1.0), -12.0);
    assert_eq!(bolab_dispersion_sign().abs(), 1.0);

    let mut verdicts = [0u8; 16];
    let mut rows = 0usize;
    unsafe {
        assert_eq!(bolab_norm_family_audit(0.45, 12, 0.001, 0.001, verdicts.as_mut_ptr(), 16, &mut rows), BolabStatus::Ok);
    }
    assert_eq!(rows, 13);
    assert!(verdicts[..rows].iter().all(|v| *v == 1));
    unsafe {
        assert_eq!(bolab_norm_family_audit(0.45, 12, 0.001, 0.001, verdicts.as_mut_ptr(), 4, &mut rows), BolabStatus::BufferTooSmall);
    }
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(manifest_dir().join("include/bolab.h")).unwrap();
    for name in [
        "bolab_last_error",
        "bolab_grid_new",
        "bolab_grid_free",
        "bolab_field_from_real",
        "bolab_field_free",
        "bolab_field_values",
        "bolab_field_coeffs",
        "bolab_hilbert",
        "bolab_fractional_derivative",
        "bolab_free_evolve",
        "bolab_project_half_line",
        "bolab_lp_block",
        "bolab_lowpass_p0",
        "bolab_sobolev_norm",
        "bolab_is_one_admissible",
        "bolab_norm_family_audit",
        "bolab_dispersion_sign",
        "bolab_illposed_phase",
    ] {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct BolabGrid BolabGrid;"));
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "bolab.h"

int main(void) {
    BolabGrid *g = NULL;
    if (bolab_grid_new(32, 6.283185307179586, &g) != BOLAB_STATUS_OK) return 1;
    double xs[32];
    for (int j = 0; j < 32; ++j) xs[j] = cos(-3.141592653589793 + j * 6.283185307179586 / 32);
    BolabField *f = NULL, *h = NULL;
    if (bolab_field_from_real(g, xs, 32, &f) != BOLAB_STATUS_OK) return 2;
    if (bolab_hilbert(f, &h) != BOLAB_STATUS_OK) return 3;
    double norm = 0.0;
    if (bolab_sobolev_norm(h, 0.0, false, &norm) != BOLAB_STATUS_OK) return 4;
    if (fabs(norm - sqrt(3.141592653589793)) > 1e-12) return 5;
    if (bolab_grid_new(0, 1.0, &g) != BOLAB_STATUS_INVALID_ARGUMENT || bolab_last_error() == NULL) return 6;
    bolab_field_free(h);
    bolab_field_free(f);
    printf("ok\n");
    return 0;
}
"#;

/// Compiles a C client against the header and, when the static library is present, links and runs it.
#[test]
fn c_client_compiles_and_runs() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let tmp = std::env::temp_dir().join(format!("bolab_ffi_{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    let src = tmp.join("client.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let include = manifest_dir().join("include");
    let syntax = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"]).arg(&include).arg(&src).status().unwrap();
    assert!(syntax.success(), "header does not compile as C99");

    // `cargo test` leaves the library next to the test binary in deps/; `cargo build` uplifts it one level
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let Some(lib) = [deps.join("libbolab_ffi.a"), deps.parent().unwrap().join("libbolab_ffi.a")].into_iter().find(|p| p.exists())
    else {
        eprintln!("libbolab_ffi.a not built; link step skipped");
        return;
    };
    let bin = tmp.join("client");
    let linked = Command::new("cc")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(linked.success());
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "client exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
    let _ = std::fs::remove_dir_all(&tmp);
}
