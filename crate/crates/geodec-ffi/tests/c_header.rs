//! Compiles a C program against the generated header and the static
//! library, then runs it on the first four-state plant file.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <stdlib.h>
#include "geodec.h"

static char *slurp(const char *path) {
    FILE *f = fopen(path, "rb");
    if (!f) return NULL;
    fseek(f, 0, SEEK_END);
    long n = ftell(f);
    fseek(f, 0, SEEK_SET);
    char *buf = malloc(n + 1);
    if (fread(buf, 1, n, f) != (size_t)n) { fclose(f); free(buf); return NULL; }
    buf[n] = 0;
    fclose(f);
    return buf;
}

int main(int argc, char **argv) {
    if (argc < 2) return 10;
    char *text = slurp(argv[1]);
    if (!text) return 11;
    GeodecPlant *plant = NULL;
    if (geodec_plant_from_json(text, &plant) != GEODEC_STATUS_OK) return 12;
    free(text);

    GeodecAnalysis a;
    if (geodec_analyze(plant, NULL, &a) != GEODEC_STATUS_OK || !a.solvable) return 13;

    GeodecController *ctrl = NULL;
    if (geodec_synthesize(plant, NULL, GEODEC_TRIPLE_VM, NULL, NULL, 0, &ctrl) != GEODEC_STATUS_OK) {
        fprintf(stderr, "%s\n", geodec_last_error());
        return 14;
    }
    GeodecVerification v;
    if (geodec_verify(plant, ctrl, NULL, &v) != GEODEC_STATUS_OK || !v.decoupled) return 15;

    size_t rows = 0, cols = 0;
    if (geodec_controller_matrix(ctrl, GEODEC_CONTROLLER_MATRIX_DC, NULL, 0, &rows, &cols)
        != GEODEC_STATUS_BUFFER_TOO_SMALL) return 16;
    printf("order %zu dc %zux%zu markov %.1e\n", geodec_controller_order(ctrl), rows, cols,
           v.max_markov_residual);

    geodec_controller_free(ctrl);
    geodec_plant_free(plant);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = target_dir().join("libgeodec_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();

    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let out = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&bin)
        .output()
        .expect("C compiler runs");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let run = Command::new(&bin)
        .arg(manifest.join("../geodec/fixtures/four_state_a.json"))
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(
        run.status.success(),
        "exit {:?}: {stdout} {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(stdout.starts_with("order "), "{stdout}");
    assert!(stdout.contains("dc 3x3"), "{stdout}");
}
