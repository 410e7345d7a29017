use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subset-relay"))
        .args(args)
        .env_remove("SUBSET_RELAY_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn rates_of_the_first_example() {
    let o = run(&["rates", "--T", "5", "--N1", "2", "--N2", "3", "--j", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("R = min(R1, R2)        3/10 (0.3000)"), "{s}");
    assert!(s.contains("nonadaptive baseline   1/4 (0.2500)"), "{s}");
    assert!(s.contains("nominal 6"), "{s}");
}

#[test]
fn rates_of_the_second_example() {
    let o = run(&["rates", "--T", "6", "--N1", "2", "--N2", "3", "--j", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("6/13 (0.4615)"));
}

#[test]
fn omitted_j_picks_the_optimum() {
    let o = run(&["rates", "--T", "5", "--N1", "2", "--N2", "3", "--csv"]);
    let s = stdout(&o);
    let row: Vec<&str> = s.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[3], "1");
    assert_eq!(row[7], "1/3");
}

#[test]
fn invalid_parameters_are_usage_errors() {
    assert_eq!(run(&["rates", "--T", "5", "--N1", "6", "--N2", "3"]).status.code(), Some(1));
    assert_eq!(run(&["rates", "--T", "5", "--N1", "2", "--N2", "3", "--j", "2"]).status.code(), Some(1));
    assert_eq!(run(&["rates", "--T", "5"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["figure-data", "--figure", "7"]).status.code(), Some(1));
}

#[test]
fn exhaustive_verify_needs_small_delay() {
    let o = run(&["verify", "--T", "9", "--N1", "2", "--N2", "3", "--j", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--randomized"));
    let o = run(&["verify", "--T", "9", "--N1", "2", "--N2", "3", "--j", "1", "--randomized", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn verify_passes_and_mutation_fails() {
    let o = run(&["verify", "--T", "5", "--N1", "2", "--N2", "3", "--j", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("max payload 10 (bound 10)"));
    let o = run(&["verify", "--T", "6", "--N1", "2", "--N2", "3", "--j", "1", "--mutate-grouping"]);
    assert_eq!(o.status.code(), Some(2));
    let s = stdout(&o);
    assert!(s.contains("FAIL") && s.contains("reproduced end to end: true"), "{s}");
}

#[test]
fn sizes_of_a_figure_point() {
    let o = run(&["sizes", "--T", "15", "--N1", "4", "--N2", "6", "--j", "0"]);
    let s = stdout(&o);
    assert!(s.contains("112 symbols, 448 bits (56 bytes)"), "{s}");
    assert!(s.contains("12 symbols, 48 bits (6 bytes)"), "{s}");
}

#[test]
fn simulate_is_seeded_from_the_environment() {
    let args = ["simulate", "--T", "6", "--N1", "2", "--N2", "3", "--alpha", "0.1", "--trials", "20000"];
    let with_env = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_subset-relay")).args(args).env("SUBSET_RELAY_SEED", seed).output().unwrap()
    };
    let a = with_env("11");
    let b = with_env("11");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let s = stdout(&a);
    assert!(s.starts_with("T,N1,N2,scheme,j,mode,alpha,beta,seed,trials"));
    assert_eq!(s.lines().count(), 3);
    assert!(s.lines().nth(1).unwrap().contains(",subset,1,analytic,0.1,0.1,11,20000,"));
    let mut explicit = args.to_vec();
    explicit.extend(["--seed", "11"]);
    assert_eq!(run(&explicit).stdout, a.stdout);
}

#[test]
fn mac_region_csv() {
    let o = run(&["mac", "--T", "5", "--N1", "1", "--N2", "2", "--N3", "1", "--mix-bound", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.lines().any(|l| l.starts_with("R1,R2,")));
    assert!(s.lines().count() > 3);
}

#[test]
fn figure_data_to_file() {
    let dir = std::env::temp_dir().join(format!("subset-relay-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fig3.csv");
    let o = run(&["figure-data", "--figure", "3", "--N2", "6", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.contains("15,4,6,subset_j0,0,4,112,448,56"), "{csv}");
    std::fs::remove_dir_all(&dir).unwrap();
    let o = run(&["figure-data", "--figure", "2", "--N2"]);
    assert_eq!(stdout(&o), "T,N1,N2,scheme,j,rate,rate_float\n");
}
