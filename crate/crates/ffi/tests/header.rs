use std::path::{Path, PathBuf};
use std::process::Command;

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("nullcone.h")
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "typedef struct NcConfig NcConfig;",
        "typedef struct NcRun NcRun;",
        "NC_STATUS_OK = 0",
        "nc_config_parse(",
        "nc_run(",
        "nc_run_report_json(",
        "nc_last_error(",
        "nc_string_free(",
        "nc_tortoise(",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

/// Compiles a small C program against the header and static library when a
/// C compiler is on PATH.
#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipped");
        return;
    }
    let deps = std::env::current_exe().unwrap();
    let profile_dir = deps.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libnullcone_ffi.a");
    if !lib.is_file() {
        eprintln!("static library not built at {}; skipped", lib.display());
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "nullcone.h"
int main(void) {
    double rs = 0.0;
    if (nc_tortoise(1.0, 4.0, &rs) != NC_STATUS_OK) return 1;
    NcConfig *cfg = NULL;
    if (nc_config_parse("{\"bogus\": 1}", &cfg) != NC_STATUS_CONFIG_SCHEMA) return 2;
    if (cfg != NULL || nc_last_error() == NULL) return 3;
    printf("%.6f\n", rs);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "5.386294");
}
