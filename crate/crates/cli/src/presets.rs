//! Built-in experiment configs, compiled into the binary.
//!
//! The same files live under `presets/` in the source tree so they can be
//! copied and edited as starting points for custom runs.

use crate::config::ExperimentConfig;

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    text: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "point-coverage-comparison",
        summary: "point and box-crossing coverage, mosaic field vs iid radii",
        text: include_str!("../presets/point-coverage-comparison.json"),
    },
    Preset {
        name: "segment-coverage-reversal",
        summary: "segment coverage, cylinder field vs iid radii, sweeping length",
        text: include_str!("../presets/segment-coverage-reversal.json"),
    },
    Preset {
        name: "cylinder-coverage-saturation",
        summary: "point coverage under a cylinder field saturating below its bound",
        text: include_str!("../presets/cylinder-coverage-saturation.json"),
    },
    Preset {
        name: "heavy-tail-coverage",
        summary: "point coverage with truncated Pareto radii approaching full cover",
        text: include_str!("../presets/heavy-tail-coverage.json"),
    },
    Preset {
        name: "contraction-check",
        summary: "crossing-failure contraction across one scale tripling",
        text: include_str!("../presets/contraction-check.json"),
    },
    Preset {
        name: "mosaic-scan-fine-cells",
        summary: "threshold brackets over a fine-celled mosaic field grid",
        text: include_str!("../presets/mosaic-scan-fine-cells.json"),
    },
    Preset {
        name: "mosaic-scan-coarse-cells",
        summary: "threshold brackets over a coarse-celled mosaic field grid",
        text: include_str!("../presets/mosaic-scan-coarse-cells.json"),
    },
];

pub fn lookup(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

impl Preset {
    pub fn parse(&self) -> Result<ExperimentConfig, serde_json::Error> {
        serde_json::from_str(self.text)
    }
}
