#![allow(dead_code)]

use std::path::Path;

use fracvas::harness::{run_experiment, Experiment, ExperimentConfig, TestReport};
use fracvas::model::ModelParams;

/// (nu, x, e^{-x} I_nu(x)), mpmath at 40 digits.
pub const BESSEL_SCALED: [(f64, f64, f64); 54] = [
    (-0.7, 0.1, 2.4831336942917629785),
    (-0.7, 0.5, 0.64922470995935227734),
    (-0.7, 1.0, 0.38284084803076456258),
    (-0.7, 2.5, 0.23793369469343869473),
    (-0.7, 5.0, 0.17364775317816809413),
    (-0.7, 10.0, 0.1245685472345235277),
    (-0.7, 17.3, 0.095231849030808691862),
    (-0.7, 25.0, 0.079398455567552762048),
    (-0.7, 29.9, 0.072660997033388517705),
    (-0.7, 30.1, 0.072421194946654855686),
    (-0.7, 35.0, 0.067199362583299130341),
    (-0.7, 42.0, 0.061380363715488959065),
    (-0.7, 50.0, 0.056282337707609013654),
    (-0.3, 0.1, 1.7184455276796167464),
    (-0.3, 0.5, 0.77264198266240841489),
    (-0.3, 1.0, 0.48297966896979102528),
    (-0.3, 2.5, 0.26484875009554900849),
    (-0.3, 5.0, 0.18168207412986536231),
    (-0.3, 10.0, 0.1272270605859966851),
    (-0.3, 17.3, 0.096373392999621658749),
    (-0.3, 25.0, 0.080049535607446801063),
    (-0.3, 29.9, 0.073157119809872153989),
    (-0.3, 30.1, 0.072912325982588830781),
    (-0.3, 35.0, 0.067590138009328087679),
    (-0.3, 42.0, 0.06167692968797556888),
    (-0.3, 50.0, 0.056510224260500988696),
    (0.3, 0.0, 0.0),
    (0.3, 0.1, 0.41122178014176283386),
    (0.3, 0.5, 0.46760586418093304082),
    (0.3, 1.0, 0.40054527739459047075),
    (0.3, 2.5, 0.26217204524001745712),
    (0.3, 5.0, 0.18166915887022482583),
    (0.3, 10.0, 0.12722706016846264343),
    (0.3, 17.3, 0.096373392999621513427),
    (0.3, 25.0, 0.080049535607446801063),
    (0.3, 29.9, 0.073157119809872153989),
    (0.3, 30.1, 0.072912325982588830781),
    (0.3, 35.0, 0.067590138009328087679),
    (0.3, 42.0, 0.06167692968797556888),
    (0.3, 50.0, 0.056510224260500988696),
    (0.7, 0.0, 0.0),
    (0.7, 0.1, 0.12248891950359871639),
    (0.7, 0.5, 0.262348714431946416),
    (0.7, 1.0, 0.28761236380622025187),
    (0.7, 2.5, 0.23506826176520311447),
    (0.7, 5.0, 0.17363435621088834597),
    (0.7, 10.0, 0.12456854680894372638),
    (0.7, 17.3, 0.095231849030808544897),
    (0.7, 25.0, 0.079398455567552762048),
    (0.7, 29.9, 0.072660997033388517705),
    (0.7, 30.1, 0.072421194946654855686),
    (0.7, 35.0, 0.067199362583299130341),
    (0.7, 42.0, 0.061380363715488959065),
    (0.7, 50.0, 0.056282337707609013654),
];
/// Same, x well inside the asymptotic range.
pub const BESSEL_LARGE: [(f64, f64, f64); 16] = [
    (-0.7, 40.0, 0.062886944636261071364),
    (-0.7, 80.0, 0.044535825774950110923),
    (-0.7, 160.0, 0.031515436714419827208),
    (-0.7, 320.0, 0.022293176836220532926),
    (-0.3, 40.0, 0.06320621825484737047),
    (-0.3, 80.0, 0.044648011016732987952),
    (-0.3, 160.0, 0.031554979670637069777),
    (-0.3, 320.0, 0.022307136278569425048),
    (0.3, 40.0, 0.06320621825484737047),
    (0.3, 80.0, 0.044648011016732987952),
    (0.3, 160.0, 0.031554979670637069777),
    (0.3, 320.0, 0.022307136278569425048),
    (0.7, 40.0, 0.062886944636261071364),
    (0.7, 80.0, 0.044535825774950110923),
    (0.7, 160.0, 0.031515436714419827208),
    (0.7, 320.0, 0.022293176836220532926),
];
/// ([t, m1, m2, s1, s2, r], E exp(tXY)) by 200x200 Gauss-Hermite.
pub const PRODUCT_GH: [([f64; 6], f64); 5] = [
    ([0.3, 0.0, 0.0, 1.0, 0.5, 0.0], 1.0114434748483472),
    ([0.2, 0.5, -0.3, 1.2, 0.8, 0.4], 1.0780517614264),
    ([-0.25, 1.0, 0.7, 0.9, 1.1, -0.6], 1.0576547972781798),
    ([0.1, -0.8, 1.5, 1.5, 0.7, 0.9], 1.0049499698375672),
    ([0.4, 0.2, 0.1, 0.6, 1.3, -0.2], 0.998330909968347),
];

pub fn desk() -> ModelParams {
    ModelParams::desk()
}

pub fn config(experiment: Experiment, params: ModelParams, t_list: &[f64], n_grid: usize, reps: usize, dir: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(experiment, params, t_list.to_vec(), n_grid, reps);
    c.workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    c.output_dir = dir.to_string_lossy().into_owned();
    c
}

pub fn run(cfg: &ExperimentConfig) -> TestReport {
    run_experiment(cfg).unwrap_or_else(|e| panic!("{} failed: {e}", cfg.experiment.name()))
}
