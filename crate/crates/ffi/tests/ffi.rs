use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use cgr_ffi::*;

fn last_error() -> String {
    let p = cgr_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn bundled() -> *mut CgrPairSet {
    let mut set = ptr::null_mut();
    assert_eq!(unsafe { cgr_pairs_bundled(&mut set) }, CgrStatus::Ok);
    assert!(!set.is_null());
    set
}

#[test]
fn partition_and_gap_closure() {
    let set = bundled();
    unsafe {
        assert_eq!(cgr_pairs_len(set), 54);
        let mut p = CgrPartition::default();
        assert_eq!(cgr_partition(set, 0.0, &mut p), CgrStatus::Ok);
        assert_eq!((p.kept_pairs, p.n_records), (34, 13256));
        assert!((p.delta - 0.2810).abs() < 5e-5, "{p:?}");
        assert!((p.sd_direct - 0.2848).abs() < 5e-4, "{p:?}");

        let mut z = CgrPartition::default();
        assert_eq!(cgr_zero_baseline(set, &mut z), CgrStatus::Ok);
        assert_eq!((z.kept_pairs, z.n_records, z.macro_direct), (20, 7242, 0.0));

        let mut rho = 0.0;
        assert_eq!(
            cgr_gap_closure(p.macro_direct, p.macro_assisted, p.macro_gen, &mut rho),
            CgrStatus::Ok
        );
        assert!((rho - (p.macro_assisted - p.macro_direct) / (p.macro_gen - p.macro_direct)).abs() < 1e-12);
        assert_eq!(cgr_gap_closure(0.5, 0.6, 0.5, &mut rho), CgrStatus::Undefined);
        cgr_pairs_free(set);
    }
}

#[test]
fn bootstrap_and_leave_one_out() {
    let set = bundled();
    unsafe {
        let mut a = CgrInterval::default();
        let mut b = CgrInterval::default();
        assert_eq!(cgr_bootstrap(set, 0.0, CGR_UNIT_PAIR, 2000, 5, &mut a), CgrStatus::Ok);
        assert_eq!(cgr_bootstrap(set, 0.0, CGR_UNIT_PAIR, 2000, 5, &mut b), CgrStatus::Ok);
        assert_eq!(a, b);
        assert!(a.ci_low < a.point_estimate && a.point_estimate < a.ci_high);
        assert_eq!(cgr_bootstrap(set, 0.0, 9, 2000, 5, &mut a), CgrStatus::InvalidArgument);
        assert!(last_error().contains("unit"));
        assert_eq!(cgr_bootstrap(set, 0.0, CGR_UNIT_PAIR, 10, 5, &mut a), CgrStatus::InvalidArgument);

        let mut r = CgrRange::default();
        assert_eq!(cgr_leave_one_out(set, 0.0, CGR_AXIS_SOLVER, &mut r), CgrStatus::Ok);
        assert!((r.min - 0.2450).abs() < 5e-4 && (r.max - 0.3324).abs() < 5e-4, "{r:?}");
        assert_eq!(cgr_leave_one_out(set, 0.0, 7, &mut r), CgrStatus::InvalidArgument);
        cgr_pairs_free(set);
    }
}

#[test]
fn extraction_over_the_abi() {
    let text = CString::new("I choose B").unwrap();
    let ids = CString::new("ABCD").unwrap();
    let mut out = CgrExtraction::default();
    unsafe {
        assert_eq!(cgr_extract_answer(text.as_ptr(), &mut out), CgrStatus::Ok);
        assert_eq!((out.letter, out.span_start, out.span_end), (b'I', 0, 1));
        assert_eq!(cgr_extract_answer_in_set(text.as_ptr(), ids.as_ptr(), &mut out), CgrStatus::Ok);
        assert_eq!((out.letter, out.span_start), (b'B', 9));

        let none = CString::new("nothing here").unwrap();
        assert_eq!(cgr_extract_answer(none.as_ptr(), &mut out), CgrStatus::Ok);
        assert_eq!((out.letter, out.span_start, out.span_end), (b'X', -1, -1));

        let bad_ids = CString::new("A1").unwrap();
        assert_eq!(
            cgr_extract_answer_in_set(text.as_ptr(), bad_ids.as_ptr(), &mut out),
            CgrStatus::InvalidArgument
        );
        let empty = CString::new("").unwrap();
        assert_eq!(
            cgr_extract_answer_in_set(text.as_ptr(), empty.as_ptr(), &mut out),
            CgrStatus::InvalidArgument
        );

        let invalid = [0xffu8, 0xfe, 0];
        assert_eq!(cgr_extract_answer(invalid.as_ptr().cast(), &mut out), CgrStatus::InvalidUtf8);
    }
}

#[test]
fn scaffold_scan() {
    let src = CString::new(
        "r = llm_model(p, exp_config)\nsolverLLM_answer = \"C\"\nreturn (solverLLM_answer, genLLM_answer, genLLM_difficulty)\n",
    )
    .unwrap();
    let mut out = CgrScanReport::default();
    assert_eq!(unsafe { cgr_scan_scaffold(src.as_ptr(), &mut out) }, CgrStatus::Ok);
    assert_eq!(
        out,
        CgrScanReport {
            literal_answer_hits: 1,
            call_sites: 1,
            has_return_contract: true
        }
    );
}

#[test]
fn null_and_io_errors() {
    let mut set = ptr::null_mut();
    unsafe {
        assert_eq!(cgr_pairs_load(ptr::null(), &mut set), CgrStatus::NullArgument);
        assert!(last_error().contains("path"));
        let missing = CString::new("/nonexistent/pairs.jsonl").unwrap();
        assert_eq!(cgr_pairs_load(missing.as_ptr(), &mut set), CgrStatus::Io);
        assert!(set.is_null());

        let dir = std::env::temp_dir().join(format!("cgr-ffi-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let bad = dir.join("bad.jsonl");
        std::fs::write(&bad, "{not json}\n").unwrap();
        let bad_c = CString::new(bad.to_str().unwrap()).unwrap();
        assert_eq!(cgr_pairs_load(bad_c.as_ptr(), &mut set), CgrStatus::Parse);

        let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/retained_pairs.jsonl");
        let good = CString::new(fixture.to_str().unwrap()).unwrap();
        assert_eq!(cgr_pairs_load(good.as_ptr(), &mut set), CgrStatus::Ok);
        assert_eq!(cgr_pairs_len(set), 54);
        cgr_pairs_free(set);
        std::fs::remove_dir_all(dir).unwrap();

        let mut p = CgrPartition::default();
        assert_eq!(cgr_partition(ptr::null(), 0.0, &mut p), CgrStatus::NullArgument);
        let set = bundled();
        assert_eq!(cgr_partition(set, 0.0, ptr::null_mut()), CgrStatus::NullArgument);
        assert_eq!(cgr_partition(set, 1.5, &mut p), CgrStatus::InvalidArgument);
        assert_eq!(cgr_partition(set, 0.99, &mut p), CgrStatus::EmptyInput);
        cgr_pairs_free(set);
        cgr_pairs_free(ptr::null_mut());
        assert_eq!(cgr_pairs_len(ptr::null()), 0);
    }
}

#[test]
fn header_compiles_as_c() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = include.join("cgr.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "cgr_pairs_load",
        "cgr_pairs_free",
        "cgr_bootstrap",
        "cgr_scan_scaffold",
        "cgr_last_error_message",
        "CGR_STATUS_PANIC",
        "typedef struct CgrPairSet CgrPairSet",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler on PATH; header syntax check skipped");
        return;
    };
    let dir = std::env::temp_dir().join(format!("cgr-ffi-hdr-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"cgr.h\"\nint main(void) {\n  CgrPairSet *s = 0;\n  CgrPartition p;\n  if (cgr_pairs_bundled(&s) != CGR_STATUS_OK) return 1;\n  cgr_partition(s, 0.0, &p);\n  cgr_pairs_free(s);\n  return 0;\n}\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    std::fs::remove_dir_all(dir).unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| {
            std::process::Command::new(c)
                .arg("--version")
                .output()
                .is_ok_and(|o| o.status.success())
        })
        .ok_or(())
}
