use dpg_transport::driver::verify::check_gram;
use dpg_transport::driver::{run_adaptive, run_conjecture, run_verify, ExperimentConfig, Status};
use dpg_transport::mesh::downstream_violations;
use nalgebra::DMatrix;

fn cfg(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).unwrap()
}

#[test]
fn jump_source_in_1d_reduces_eta_every_step() {
    let c = cfg("[problem]\nstock = \"jump1d\"\n[adaptive]\ntheta = 0.5\nr = 1\nmax_iterations = 10");
    let recs = run_adaptive(&c, None).unwrap().records;
    assert!(recs.len() >= 5);
    for w in recs.windows(2) {
        assert!(w[1].eta < w[0].eta);
        assert!(w[1].nu_obs < 1.0);
        assert!(w[1].ndof > w[0].ndof);
    }
}

#[test]
fn uniform_mode_matches_direct_refinement() {
    let c = cfg("[problem]\nstock = \"smooth1d\"\n[adaptive]\nmode = \"uniform\"\nmax_iterations = 3");
    let recs = run_adaptive(&c, None).unwrap().records;
    assert_eq!(recs.iter().map(|r| r.ndof).collect::<Vec<_>>(), vec![8, 16, 32]);
    for w in recs.windows(2) {
        let rate = (w[0].err_u / w[1].err_u).log2();
        assert!((rate - 1.0).abs() < 0.1, "rate {rate}");
    }
    for r in &recs {
        let direct = cfg(&format!("[problem]\nstock = \"smooth1d\"\nresolution = {}\n[adaptive]\nmax_iterations = 1", r.ndof / 2));
        let d = run_adaptive(&direct, None).unwrap().records;
        assert!((d[0].err_u - r.err_u).abs() <= 1e-12 * r.err_u);
    }
}

#[test]
fn adaptive_2d_never_coarsens_downstream() {
    for stock in ["jump2d", "smooth2d"] {
        for it in 1..=4 {
            let c = cfg(&format!("[problem]\nstock = \"{stock}\"\n[adaptive]\nmax_iterations = {it}"));
            let out = run_adaptive(&c, None).unwrap();
            let b = c.problem.constant_b().unwrap();
            assert_eq!(downstream_violations(&out.mesh, b), 0, "{stock} after {it} iterations");
        }
    }
}

#[test]
fn verify_negative_control_names_the_broken_invariant() {
    let mut g = DMatrix::<f64>::identity(3, 3);
    g[(0, 2)] = 0.3;
    let r = check_gram([g].iter());
    assert_eq!((r.name, r.status), ("gram_spd", Status::Fail));
}

#[test]
fn verify_skips_vacuous_checks_without_source() {
    let rep = run_verify(&cfg("[problem]\nstock = \"zero1d\"")).unwrap();
    assert!(rep.all_passed());
    let skipped: Vec<_> = rep.checks.iter().filter(|c| c.status == Status::Skipped).map(|c| c.name).collect();
    assert!(skipped.contains(&"ls_first_order"));
    assert!(skipped.contains(&"type_ii_omega_bound"));
}

#[test]
fn verify_default_config_passes() {
    for stock in ["smooth1d", "jump1d", "smooth2d", "jump2d"] {
        let rep = run_verify(&cfg(&format!("[problem]\nstock = \"{stock}\""))).unwrap();
        assert!(rep.all_passed(), "{stock}: {:?}\n{}", rep.failed(), rep.render());
    }
}

#[test]
fn conjecture_table_in_2d_is_monotone() {
    let t = run_conjecture(&cfg("[conjecture]\nscenarios = [\"jump2d\", \"smooth2d\"]\nmax_depth = 3")).unwrap();
    assert!(!t.rows.is_empty() || !t.skipped.is_empty());
    assert!(t.monotone(1e-12), "{}", t.to_csv());
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg("[problem]\nstock = \"jump1d\"\n[adaptive]\nmax_iterations = 3");
    let out = run_adaptive(&c, Some(dir.path())).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), out.records.len() + 1);
    for i in 0..out.records.len() {
        let ind = std::fs::read_to_string(dir.path().join(format!("indicators_{i}.csv"))).unwrap();
        assert!(ind.starts_with("cell_id,eta2,Rdelta2,alpha,omega,type,marked\n"));
        assert!(dir.path().join(format!("mesh_{i}.txt")).exists());
    }
}
