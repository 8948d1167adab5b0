//! End-to-end runs of the file-driven pipeline on a tiny configuration.

use std::path::Path;

use msflow::io::{import_vtk, parse_config_str, run, SWEEP_HEADER};

fn config(mode: &str, out: &Path, extra: &str) -> String {
    format!(
        "[run]\nmode = {mode}\noutput = {}\n[mesh]\ncoarse = 2 2\nrefinement = 2\n\
         [domain]\ninclusion = -0.4 0.4 0.3\ninclusion = 0.45 -0.3 0.35\n\
         [model]\npreset = test1\nn_steps = 4\n{extra}",
        out.display()
    )
}

#[test]
fn sweep_tables_are_complete_and_deterministic() {
    let extra = "darcy = 1e-3 1e-5\n[multiscale]\nbasis = 1 2 4\noversampling = both\n";
    let read = |dir: &Path| {
        let spec = parse_config_str(&config("sweep", dir, extra), dir).unwrap();
        let summary = run(&spec).unwrap();
        assert_eq!(summary.artifacts.len(), 2);
        ["sweep_da_1e-3.csv", "sweep_da_1e-5.csv"].map(|f| std::fs::read(dir.join(f)).unwrap())
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = read(a.path());
    assert_eq!(first, read(b.path()));
    for bytes in &first {
        let text = String::from_utf8(bytes.clone()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(lines.len(), 4);
        for (line, m) in lines[1..].iter().zip([1, 2, 4]) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 8);
            assert_eq!(cols[0].parse::<usize>().unwrap(), m);
            assert_eq!(cols[1].parse::<usize>().unwrap(), 4 * m + 4);
            assert!(cols[2..].iter().all(|c| c.parse::<f64>().unwrap() >= 0.0));
        }
    }
}

#[test]
fn fine_ms_and_compare_modes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let fine_dir = d.join("fine");
    run(&parse_config_str(&config("fine", &fine_dir, "darcy = 1e-3\n"), d).unwrap()).unwrap();
    let stats = std::fs::read_to_string(fine_dir.join("stats.txt")).unwrap();
    assert!(stats.contains("porous") && stats.contains("fluid"));
    let reference = import_vtk(&fine_dir.join("fine.vtk")).unwrap();
    assert_eq!(reference.state.n_cells(), 32);

    let ms_dir = d.join("ms");
    let cache = d.join("cache");
    let extra = format!(
        "darcy = 1e-3\n[multiscale]\nbasis = 2\noversampling = off\ncache = {}\n[compare]\nreference = {}\n",
        cache.display(),
        fine_dir.join("fine.vtk").display()
    );
    let spec = parse_config_str(&config("ms", &ms_dir, &extra), d).unwrap();
    run(&spec).unwrap();
    let report = std::fs::read_to_string(ms_dir.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 2);
    assert!(std::fs::read_dir(&cache).unwrap().count() >= 1);
    // a second run is served from the cache and gives identical output
    let before = std::fs::read(ms_dir.join("ms_M2_plain.vtk")).unwrap();
    run(&spec).unwrap();
    assert_eq!(before, std::fs::read(ms_dir.join("ms_M2_plain.vtk")).unwrap());

    let cmp_dir = d.join("cmp");
    let extra = format!(
        "[compare]\nreference = {}\ncandidate = {}\n",
        fine_dir.join("fine.vtk").display(),
        fine_dir.join("fine.vtk").display()
    );
    run(&parse_config_str(&config("compare", &cmp_dir, &extra), d).unwrap()).unwrap();
    let text = std::fs::read_to_string(cmp_dir.join("compare.txt")).unwrap();
    assert!(text.starts_with("e_u 0\n"), "{text}");
}
