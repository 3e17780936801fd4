use std::path::PathBuf;
use std::process::Command;

/// The cdylib built alongside this test binary, in target/<profile>/.
fn library() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    let dir = exe.parent().and_then(|d| d.parent()).unwrap();
    dir.join("libpvclass_py.so")
}

#[test]
fn python_smoke_script_passes() {
    let lib = library();
    assert!(lib.exists(), "{} missing", lib.display());
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../python/smoke_test.py");
    let out = Command::new("python3").arg(&script).arg(&lib).output().expect("python3 not runnable");
    let stdout = String::from_utf8_lossy(&out.stdout);
    print!("{stdout}");
    assert!(out.status.success(), "{stdout}\n{}", String::from_utf8_lossy(&out.stderr));
}
