//! Compiles and runs a small C program against the generated header and the
//! static library. Skipped with a notice when no C compiler is on PATH.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "bacycle.h"

static const char *PDB =
"ATOM      1  N   ALA A   1       0.000   0.000   0.000  1.00  0.00           N\n"
"ATOM      2  CA  ALA A   1       1.458   0.000   0.000  1.00  0.00           C\n"
"ATOM      3  C   ALA A   1       2.009   1.420   0.000  1.00  0.00           C\n"
"ATOM      4  N   LYS B   1       6.000   0.000   0.000  1.00  0.00           N\n"
"ATOM      5  CA  LYS B   1       7.458   0.000   0.000  1.00  0.00           C\n"
"ATOM      6  C   LYS B   1       8.009   1.420   0.000  1.00  0.00           C\n"
"END\n";

int main(void) {
    BacStructure *s = NULL;
    BacScorer *sc = NULL;
    double r = 0.0, ddg = 0.0;
    if (strlen(bac_version()) == 0) return 10;
    if (bac_structure_parse_pdb(PDB, "toy", &s) != BAC_STATUS_OK) return 11;
    if (bac_scorer_builtin(&sc) != BAC_STATUS_OK) return 12;
    if (bac_ddg(s, sc, "A", "B", "AA1D", BAC_ESTIMATOR_CYCLE, 1, 0, 1.0, 0.0, &r, &ddg) != BAC_STATUS_OK) return 13;
    if (ddg != -r) return 14;
    if (bac_ddg(s, sc, "A", "B", "not-a-mutation", BAC_ESTIMATOR_CYCLE, 1, 0, 1.0, 0.0, &r, &ddg) != BAC_STATUS_PARSE) return 15;
    if (bac_last_error_message() == NULL) return 16;
    printf("%.17g\n", r);
    bac_structure_free(s);
    bac_scorer_free(sc);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler on PATH; header smoke test not run");
        return;
    }
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = deps.join("libbacycle_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let exe = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let out = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "cc failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(&exe).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let r: f64 = String::from_utf8(run.stdout).unwrap().trim().parse().unwrap();
    assert!(r.is_finite());
}
