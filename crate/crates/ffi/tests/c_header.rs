use std::path::{Path, PathBuf};
use std::process::Command;

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libhalfspace_thermal_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipped: no C compiler or static library");
        return;
    }
    let dir = scratch_dir();
    let exe = dir.join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(root.join("include"))
        .arg(root.join("tests/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!(v > 0.0 && v < 1.0);
    std::fs::remove_dir_all(dir).ok();
}

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ht-ffi-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn header_declares_the_api() {
    let header =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/halfspace_thermal.h")).unwrap();
    for name in [
        "typedef struct HtProblem HtProblem;",
        "HT_STATUS_OK = 0",
        "HT_STATUS_VALIDATION_FAILED = 5",
        "ht_problem_from_json",
        "ht_problem_new_step",
        "ht_problem_free",
        "ht_temperature(",
        "ht_temperature_many",
        "ht_identity_integral",
        "ht_kernel_g",
        "ht_validate",
        "ht_last_error_message",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
