use eigenshrink::shrinker::Optimal;
use eigenshrink::sim::{
    block_diag_check, run_study, sample_covariance, LossEvaluation, SampleEigen, ShrinkerChoice, SimConfig,
};
use eigenshrink::{AspectRatio, Error, LossId};

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

#[test]
fn summaries_do_not_depend_on_thread_count() {
    let mut c = SimConfig::new(150, 60, vec![7.0, 4.0]);
    c.replications = 5;
    c.seed = 3;
    c.losses = vec!["F,1".parse().unwrap(), "O,3".parse().unwrap(), LossId::AFFINITY];
    let one = pool(1).install(|| run_study(&c)).unwrap();
    let three = pool(3).install(|| run_study(&c)).unwrap();
    assert_eq!(one, three);
}

#[test]
fn reduced_evaluation_matches_full_with_two_spikes() {
    let mut c = SimConfig::new(160, 80, vec![8.0, 4.0]);
    c.replications = 2;
    c.losses = LossId::all();
    c.shrinker = ShrinkerChoice::HardThreshold;
    let reduced = run_study(&c).unwrap();
    c.evaluation = LossEvaluation::Full;
    let full = run_study(&c).unwrap();
    for (r, f) in reduced.losses.iter().zip(&full.losses) {
        let (a, b) = (r.empirical.mean, f.empirical.mean);
        assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{}: {a} vs {b}", r.loss);
    }
}

#[test]
fn estimator_is_nearly_block_diagonal() {
    let gamma = AspectRatio::from_dims(250, 1000).unwrap();
    let f1: LossId = "F,1".parse().unwrap();
    let mut c = SimConfig::new(1000, 250, vec![5.0]);
    c.seed = 1;
    for rep in 0..3 {
        let eig = SampleEigen::new(&sample_covariance(&c, rep).unwrap()).unwrap();
        let res = block_diag_check(&eig, 1, &Optimal::new(gamma, f1)).unwrap();
        assert!(res < 0.1, "replicate {rep}: residual {res}");
    }
}

#[test]
fn table_shrinker_runs_through_the_study() {
    let mut c = SimConfig::new(200, 100, vec![6.0]);
    c.replications = 2;
    c.shrinker = ShrinkerChoice::Table(vec![(3.0, 1.0), (10.0, 8.0)]);
    let s = run_study(&c).unwrap();
    assert!(s.losses[0].predicted.unwrap() > 0.0);
    c.shrinker = ShrinkerChoice::Table(vec![(3.0, 2.0), (3.0, 4.0)]);
    assert!(run_study(&c).is_err());
}

#[test]
fn oversized_and_malformed_configs_are_refused() {
    let big = SimConfig::new(9000, 8001, vec![5.0]);
    assert!(matches!(run_study(&big), Err(Error::Capacity(_))));
    let mut wide = SimConfig::new(100_000, 2000, vec![5.0]);
    assert!(matches!(wide.validate(), Err(Error::Capacity(_))));
    wide.allow_large = true;
    assert!(wide.validate().is_ok());
    assert!(SimConfig::new(100, 200, vec![5.0]).validate().is_err());
    assert!(SimConfig::new(100, 50, vec![4.0, 5.0]).validate().is_err());
    assert!(SimConfig::new(100, 50, vec![0.5]).validate().is_err());
}
