//! Compiles a small C program against the generated header and the static
//! library. Skipped when no C compiler is available.

use std::path::{Path, PathBuf};
use std::process::Command;

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/weyllab.h")).unwrap();
    for name in [
        "weyl_version",
        "weyl_last_error",
        "weyl_measure_new",
        "weyl_measure_strip",
        "weyl_jacobi_m_function",
        "weyl_potential_m",
        "weyl_potential_eigenvalues",
        "typedef struct WeylJacobi WeylJacobi;",
        "WEYL_STATUS_NULL_POINTER = 1",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler `{cc}`");
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libweyllab_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let out = Path::new(env!("CARGO_TARGET_TMPDIR")).join("weyllab_smoke");
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "smoke program exited with {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).contains(" ok"));
}
