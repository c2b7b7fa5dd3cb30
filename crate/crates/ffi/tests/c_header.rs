//! Compiles a C program against the generated header and the static
//! library, then runs it.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "germ_moduli.h"

int main(void) {
    GmGerm *g = NULL;
    if (gm_germ_parse("x, y^2", NULL, NULL, &g) != GM_STATUS_OK) return 10;
    GmModuli m;
    if (gm_moduli_dimension(g, "C", "target", 6, &m) != GM_STATUS_OK) return 11;
    if (!m.stabilized || m.value != 2) return 12;
    char *text = NULL;
    if (gm_germ_format(g, &text) != GM_STATUS_OK) return 13;
    if (strcmp(text, "(x, y^2)") != 0) return 14;
    gm_string_free(text);
    gm_germ_free(g);
    if (gm_germ_parse("x +", NULL, NULL, &g) != GM_STATUS_PARSE) return 15;
    if (gm_last_error() == NULL) return 16;
    printf("ok %s\n", gm_version());
    return 0;
}
"#;

#[test]
fn header_compiles_and_links() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(header_dir.join("germ_moduli.h").exists(), "header not generated");
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libgerm_moduli_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());

    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let src = tmp.join("capi_smoke.c");
    let exe = tmp.join("capi_smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&header_dir)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler runs");
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
