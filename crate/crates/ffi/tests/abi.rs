use std::ffi::{CStr, CString};
use std::ptr;

use coopbandit_ffi::*;

fn last_error() -> String {
    let p = cb_last_error_message();
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
    unsafe { cb_string_free(p) };
    s
}

const CFG: &str = r#"{"variant": "coop_ucb", "graph": "complete(4)", "K": 3, "T": 40, "reps": 4, "master_seed": 9}"#;

#[test]
fn experiment_round_trip() {
    let json = CString::new(CFG).unwrap();
    let mut exp = ptr::null_mut();
    assert_eq!(unsafe { cb_experiment_from_json(json.as_ptr(), &mut exp) }, CbStatus::Ok);
    let name = CString::new("link_p").unwrap();
    assert_eq!(unsafe { cb_experiment_set_param(exp, name.as_ptr(), 0.5) }, CbStatus::Ok);

    let mut res = ptr::null_mut();
    assert_eq!(unsafe { cb_experiment_run(exp, &mut res) }, CbStatus::Ok);
    assert_eq!(unsafe { cb_result_horizon(res) }, 40);

    let mut small = [0.0; 10];
    assert_eq!(unsafe { cb_result_copy_mean(res, small.as_mut_ptr(), small.len()) }, CbStatus::BufferTooSmall);
    assert!(last_error().contains("40"));
    let mut mean = vec![0.0; 40];
    let mut std = vec![0.0; 40];
    assert_eq!(unsafe { cb_result_copy_mean(res, mean.as_mut_ptr(), mean.len()) }, CbStatus::Ok);
    assert_eq!(unsafe { cb_result_copy_std(res, std.as_mut_ptr(), std.len()) }, CbStatus::Ok);
    assert_eq!(mean[39], unsafe { cb_result_final_mean(res) });
    assert!(mean.windows(2).all(|w| w[0] <= w[1]));

    let csv = unsafe { cb_result_csv(res) };
    let text = unsafe { CStr::from_ptr(csv) }.to_str().unwrap().to_string();
    assert_eq!(text.lines().count(), 41);
    unsafe {
        cb_string_free(csv);
        cb_result_free(res);
        cb_experiment_free(exp);
    }
}

#[test]
fn config_errors_are_reported() {
    let json = CString::new(CFG.replace("\"K\": 3", "\"K\": 3, \"colour\": 1")).unwrap();
    let mut exp = ptr::null_mut();
    assert_eq!(unsafe { cb_experiment_from_json(json.as_ptr(), &mut exp) }, CbStatus::ConfigError);
    assert!(exp.is_null());
    assert!(last_error().contains("colour"));

    let json = CString::new(CFG).unwrap();
    assert_eq!(unsafe { cb_experiment_from_json(json.as_ptr(), &mut exp) }, CbStatus::Ok);
    assert!(cb_last_error_message().is_null());
    let name = CString::new("link_p").unwrap();
    assert_eq!(unsafe { cb_experiment_set_param(exp, name.as_ptr(), 1.5) }, CbStatus::ConfigError);
    unsafe { cb_experiment_free(exp) };
}

#[test]
fn null_and_utf8_arguments() {
    let mut exp = ptr::null_mut();
    assert_eq!(unsafe { cb_experiment_from_json(ptr::null(), &mut exp) }, CbStatus::NullPointer);
    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { cb_experiment_from_json(bad.as_ptr().cast(), &mut exp) }, CbStatus::InvalidUtf8);
    assert_eq!(unsafe { cb_experiment_run(ptr::null(), ptr::null_mut()) }, CbStatus::NullPointer);
    assert_eq!(unsafe { cb_result_horizon(ptr::null()) }, 0);
    unsafe {
        cb_result_free(ptr::null_mut());
        cb_graph_free(ptr::null_mut());
        cb_string_free(ptr::null_mut());
    }
}

#[test]
fn graphs_and_helpers() {
    let spec = CString::new("multi_star(2,3)").unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { cb_graph_generate(spec.as_ptr(), 0, &mut g) }, CbStatus::Ok);
    assert_eq!(unsafe { (cb_graph_node_count(g), cb_graph_edge_count(g)) }, (8, 7));
    let stats = unsafe { cb_graph_stats(g) };
    assert!(unsafe { CStr::from_ptr(stats) }.to_str().unwrap().contains("psi=2"));
    unsafe {
        cb_string_free(stats);
        cb_graph_free(g);
    }

    let bad = CString::new("hypercube(3)").unwrap();
    assert_eq!(unsafe { cb_graph_generate(bad.as_ptr(), 0, &mut g) }, CbStatus::GraphError);

    assert!((cb_ucb_index(0.5, 4, 100, 1.1, 1.0) - 2.69896).abs() < 1e-5);
    assert!(cb_ucb_index(0.0, 0, 5, 1.1, 1.0).is_infinite());
    let v = unsafe { CStr::from_ptr(cb_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/coopbandit.h")).unwrap();
    for sym in [
        "cb_experiment_from_json",
        "cb_experiment_run",
        "cb_result_copy_mean",
        "cb_graph_generate",
        "cb_last_error_message",
        "CB_STATUS_BUFFER_TOO_SMALL",
        "typedef struct CbResult CbResult;",
    ] {
        assert!(header.contains(sym), "{sym}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let src = std::env::temp_dir().join(format!("coopbandit_header_{}.c", std::process::id()));
    std::fs::write(&src, "#include \"coopbandit.h\"\nint main(void) { return cb_version() == 0; }\n").unwrap();
    let out = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", dir])
        .arg(&src)
        .output()
        .unwrap();
    let _ = std::fs::remove_file(&src);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
