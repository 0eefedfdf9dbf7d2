use std::path::{Path, PathBuf};
use std::process::Command;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// target/<profile>, two levels above the test executable in deps/.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(manifest_dir().join("include/chirpsync.h")).unwrap();
    for name in [
        "typedef struct CsSignal CsSignal",
        "CS_STATUS_OK = 0",
        "cs_last_error_message",
        "cs_chirp_prototype",
        "cs_chirp_composite",
        "cs_signal_from_samples",
        "cs_signal_copy_samples",
        "cs_signal_free",
        "cs_occupied_bandwidth",
        "cs_mask_check_nbiot",
        "cs_optimize_nbiot",
        "cs_synchronize",
        "cs_awgn_channel",
        "cs_link_budget",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

fn compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| cc)
}

#[test]
fn c_program_links_against_the_shared_library() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let lib = artifact_dir();
    if !Path::new(&lib.join("libchirpsync_ffi.so")).exists() {
        eprintln!("no shared library in {}; skipping", lib.display());
        return;
    }
    let out_dir = tempfile::tempdir().unwrap();
    let exe = out_dir.path().join("smoke");
    let status = Command::new(cc)
        .arg(manifest_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg("-L")
        .arg(&lib)
        .args(["-lchirpsync_ffi", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&exe).env("LD_LIBRARY_PATH", &lib).output().unwrap();
    assert!(
        run.status.success(),
        "{}{}",
        String::from_utf8_lossy(&run.stdout),
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
