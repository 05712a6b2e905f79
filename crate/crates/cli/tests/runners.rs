use trotter_lab_cli::parse_config;
use trotter_lab_cli::runners::{build_grid, build_potential, run_experiment};
use trotter_lab_cli::svg::{render_svg, PlotSpec};

#[test]
fn convergence_table_plots_as_a_falling_line() {
    let cfg = parse_config(
        r#"
kind = "converge"
name = "small"
[potential]
kind = "cosine-sum"
terms = [[1.0, 1.0]]
[grid]
half_width = 4.0
points = 64
[run]
time = 1.0
n = [2, 4, 8]
reference_n = 64
[checks]
strictly_decreasing = true
"#,
        "inline",
    )
    .unwrap();
    let out = run_experiment(&cfg).unwrap();
    assert!(out.passed(), "{:?}", out.checks);
    assert_eq!(out.table.headers.len(), 2 + 9 + 2);
    assert_eq!(out.table.headers[2], "fl1_z00");
    let svg = render_svg(&out.table, &PlotSpec::new("c", "n", &["sup_error"], true, true)).unwrap();
    assert_eq!(svg.matches("<circle").count(), 3);
}

#[test]
fn random_potential_follows_the_seed() {
    let text = |seed: u64| {
        format!(
            "kind = \"kernel\"\nname = \"r\"\nseed = {seed}\n[potential]\nkind = \"random-band-limited\"\nband = 4\n[grid]\nhalf_width = 4.0\npoints = 32\n[run]\ntime = 1.0\nn = [1]\n"
        )
    };
    let a = parse_config(&text(1), "a").unwrap();
    let b = parse_config(&text(2), "b").unwrap();
    let g = build_grid(&a).unwrap();
    let va = build_potential(&a, g);
    assert_eq!(va, build_potential(&a, g));
    assert!(va.sub(&build_potential(&b, g)).unwrap().max_abs() > 1e-3);
    assert!(va.values().iter().all(|v| v.im == 0.0));
}
