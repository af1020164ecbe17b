use spincat_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; spincat_last_error_length() + 1];
    assert_eq!(unsafe { spincat_last_error_message(buf.as_mut_ptr(), buf.len()) }, SpincatStatus::Ok);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn kitten_round_trip() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { spincat_state_kitten(16, &mut s) }, SpincatStatus::Ok);
    let mut dim = 0;
    assert_eq!(unsafe { spincat_state_dim(s, &mut dim) }, SpincatStatus::Ok);
    assert_eq!(dim, 17);

    let mut p = vec![0.0; 17];
    assert_eq!(unsafe { spincat_state_z_probabilities(s, p.as_mut_ptr(), p.len()) }, SpincatStatus::Ok);
    assert!((p[0] - 0.5).abs() < 1e-12 && (p[16] - 0.5).abs() < 1e-12);

    let (mut fid, mut ratio, mut par) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(spincat_state_kitten_fidelity(s, &mut fid), SpincatStatus::Ok);
        assert_eq!(spincat_state_coherence_ratio(s, &mut ratio), SpincatStatus::Ok);
        assert_eq!(spincat_state_parity(s, 0.0, &mut par), SpincatStatus::Ok);
    }
    assert!((fid - 1.0).abs() < 1e-12);
    assert!((ratio - 1.0).abs() < 1e-12);
    assert!(par.abs() <= 1.0 + 1e-12);

    let (mut re, mut im) = (vec![0.0; 289], vec![0.0; 289]);
    assert_eq!(unsafe { spincat_state_density(s, re.as_mut_ptr(), im.as_mut_ptr(), 289) }, SpincatStatus::Ok);
    let mut copy = ptr::null_mut();
    assert_eq!(unsafe { spincat_state_from_density(16, re.as_ptr(), im.as_ptr(), 289, &mut copy) }, SpincatStatus::Ok);
    let mut fid2 = 0.0;
    assert_eq!(unsafe { spincat_state_kitten_fidelity(copy, &mut fid2) }, SpincatStatus::Ok);
    assert!((fid2 - 1.0).abs() < 1e-12);

    let mut w = vec![0.0; 19 * 36];
    assert_eq!(unsafe { spincat_state_wigner(s, 19, 36, w.as_mut_ptr(), w.len()) }, SpincatStatus::Ok);
    assert!(w.iter().any(|&x| x < 0.0));
    unsafe {
        spincat_state_free(s);
        spincat_state_free(copy);
    }
}

#[test]
fn twisted_state_matches_kitten_at_quarter_period() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { spincat_state_twisted(16, std::f64::consts::FRAC_PI_2, &mut s) }, SpincatStatus::Ok);
    let mut fid = 0.0;
    assert_eq!(unsafe { spincat_state_kitten_fidelity(s, &mut fid) }, SpincatStatus::Ok);
    assert!(fid > 1.0 - 1e-10, "{fid}");
    unsafe { spincat_state_free(s) };
}

#[test]
fn errors_are_reported() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { spincat_state_kitten(0, &mut s) }, SpincatStatus::InvalidArgument);
    assert!(s.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { spincat_state_kitten(16, ptr::null_mut()) }, SpincatStatus::NullPointer);
    assert_eq!(unsafe { spincat_state_dim(ptr::null(), &mut 0) }, SpincatStatus::NullPointer);

    assert_eq!(unsafe { spincat_state_maximally_mixed(16, &mut s) }, SpincatStatus::Ok);
    let mut short = [0.0; 4];
    assert_eq!(unsafe { spincat_state_z_probabilities(s, short.as_mut_ptr(), short.len()) }, SpincatStatus::BufferTooSmall);
    assert!(last_error().contains("17"));
    let mut ratio = 0.0;
    assert_ne!(unsafe { spincat_state_coherence_ratio(s, &mut ratio) }, SpincatStatus::Panic);
    unsafe { spincat_state_free(s) };

    let bad = vec![1.0; 289];
    let zero = vec![0.0; 289];
    assert_eq!(unsafe { spincat_state_from_density(16, bad.as_ptr(), zero.as_ptr(), 288, &mut s) }, SpincatStatus::InvalidArgument);
    let mut g = 0.0;
    assert_eq!(unsafe { spincat_parity_gain(16, 1.5, &mut g) }, SpincatStatus::InvalidArgument);
    assert_eq!(unsafe { spincat_parity_gain(16, 0.74, &mut g) }, SpincatStatus::Ok);
    assert!((g - 8.7616).abs() < 1e-9);

    // success clears the message
    assert_eq!(spincat_last_error_length(), 0);
    let mut tiny = [0 as std::ffi::c_char; 1];
    assert_eq!(unsafe { spincat_last_error_message(tiny.as_mut_ptr(), 1) }, SpincatStatus::Ok);
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(spincat_config_default(&mut cfg), SpincatStatus::Ok);
        assert_eq!(spincat_config_set_seed(cfg, 4), SpincatStatus::Ok);
        assert_eq!(spincat_config_set_format(cfg, SpincatFormat::Json), SpincatStatus::Ok);
        assert_eq!(spincat_run(cfg, SpincatCommand::Evolve, out.as_ptr()), SpincatStatus::Ok);
    }
    assert!(dir.path().join("fig2.json").exists());
    assert!(dir.path().join("figS1.meta.json").exists());

    let missing = CString::new("/nonexistent/config.json").unwrap();
    let mut other = ptr::null_mut();
    assert_eq!(unsafe { spincat_config_load(missing.as_ptr(), &mut other) }, SpincatStatus::Io);
    unsafe { spincat_config_free(cfg) };
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/spincat.h")).unwrap();
    for name in ["spincat_state_kitten", "spincat_state_free", "spincat_run", "spincat_last_error_message", "typedef struct SpincatState SpincatState"] {
        assert!(header.contains(name), "{name}");
    }
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"spincat.h\"\nint main(void) { SpincatState *s = 0; SpincatStatus st = spincat_state_kitten(16, &s); spincat_state_free(s); return st == SPINCAT_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
