use std::path::{Path, PathBuf};
use std::process::Command;

/// Directory holding the built shared library (`target/<profile>`).
fn lib_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "vista_eval.h"

int main(void) {
    double overlaps[] = {0.8, 0.6, 0.2, 0.7};
    double g = 0;
    if (vista_gsr(overlaps, 4, &g) != VISTA_STATUS_OK || g != 70.0) return 1;
    if (vista_gsr(NULL, 0, &g) != VISTA_STATUS_EMPTY) return 2;
    if (vista_last_error() == NULL) return 3;

    VistaBox b = {1, 1, 2, 2};
    VistaMask *m = NULL;
    if (vista_mask_from_box(b, 4, 4, &m) != VISTA_STATUS_OK) return 4;
    char *counts = NULL;
    if (vista_mask_counts(m, &counts) != VISTA_STATUS_OK) return 5;
    printf("%s|%llu\n", counts, (unsigned long long)vista_mask_area(m));
    vista_string_free(counts);
    vista_mask_free(m);

    VistaEvalOptions opts = vista_eval_options_default();
    if (opts.views != (VISTA_VIEW_FPV | VISTA_VIEW_TPV)) return 6;
    VistaManifest *man = NULL;
    if (vista_manifest_load("/nonexistent/manifest.json", &man) != VISTA_STATUS_IO) return 7;
    printf("%s\n", vista_version());
    return 0;
}
"#;

fn compiler() -> Option<String> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| {
            Command::new(c)
                .arg("--version")
                .output()
                .is_ok_and(|o| o.status.success())
        })
        .map(str::to_string)
}

#[test]
fn header_compiles_and_links() {
    let cc = compiler().expect("no C compiler on PATH");
    let lib = lib_dir();
    let so = lib.join("libvista_eval_ffi.so");
    assert!(so.exists(), "{} not built", so.display());
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let exe = work.path().join("main");
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg(format!("-I{}", include.display()))
        .arg(format!("-L{}", lib.display()))
        .arg(format!("-Wl,-rpath,{}", lib.display()))
        .arg("-lvista_eval_ffi")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "compile failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let stdout = String::from_utf8(run.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines, vec!["5 2 2 2 5|4", env!("CARGO_PKG_VERSION")]);
}
