use std::str::FromStr;
use std::time::Duration;

use lacam_core::search::ExtractStrategy;

/// Everything a benchmark run can switch.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub time_limit: Duration,
    pub seed: u64,
    /// `None` disables scattered paths.
    pub suo_margin: Option<u32>,
    pub mc_samples: usize,
    /// Sample pool size; `None` uses the hardware parallelism.
    pub mc_threads: Option<usize>,
    pub refiners: usize,
    pub recursive_prob: f64,
    pub recursive_timeout: Duration,
    pub extract_prob: f64,
    pub extract_strategy: ExtractStrategy,
    pub reinsert_init_prob: f64,
    /// Keep every improved solution in the report.
    pub keep_history: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Vanilla,
    All,
    NoSuo,
    NoMc,
    NoRefiners,
    NoExtract,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "vanilla" => Preset::Vanilla,
            "all" => Preset::All,
            "no-suo" => Preset::NoSuo,
            "no-mc" => Preset::NoMc,
            "no-refiners" => Preset::NoRefiners,
            "no-extract" => Preset::NoExtract,
            _ => return Err(format!("unknown preset `{s}`")),
        })
    }
}

impl Preset {
    pub fn config(self) -> RunConfig {
        let all = RunConfig {
            time_limit: Duration::from_secs(10),
            seed: 0,
            suo_margin: Some(2),
            mc_samples: 10,
            mc_threads: None,
            refiners: 4,
            recursive_prob: 0.2,
            recursive_timeout: Duration::from_secs(1),
            extract_prob: 0.01,
            extract_strategy: ExtractStrategy::Random,
            reinsert_init_prob: 0.001,
            keep_history: false,
        };
        match self {
            Preset::All => all,
            Preset::Vanilla => RunConfig {
                suo_margin: None,
                mc_samples: 1,
                refiners: 0,
                extract_prob: 0.0,
                ..all
            },
            Preset::NoSuo => RunConfig { suo_margin: None, ..all },
            Preset::NoMc => RunConfig { mc_samples: 1, ..all },
            Preset::NoRefiners => RunConfig { refiners: 0, ..all },
            Preset::NoExtract => RunConfig { extract_prob: 0.0, ..all },
        }
    }
}

pub fn parse_strategy(s: &str) -> Result<ExtractStrategy, String> {
    match s {
        "random" => Ok(ExtractStrategy::Random),
        "restart" => Ok(ExtractStrategy::Restart),
        _ => Err(format!("unknown extraction strategy `{s}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanilla_turns_everything_off() {
        let c = Preset::Vanilla.config();
        assert_eq!((c.suo_margin, c.mc_samples, c.refiners, c.extract_prob), (None, 1, 0, 0.0));
    }

    #[test]
    fn all_matches_combined_settings() {
        let c = Preset::All.config();
        assert_eq!(c.suo_margin, Some(2));
        assert_eq!(c.mc_samples, 10);
        assert_eq!(c.refiners, 4);
        assert_eq!(c.recursive_prob, 0.2);
        assert_eq!((c.extract_prob, c.extract_strategy), (0.01, ExtractStrategy::Random));
    }

    #[test]
    fn ablations_drop_one_feature() {
        let all = Preset::All.config();
        assert_eq!(Preset::NoSuo.config(), RunConfig { suo_margin: None, ..all.clone() });
        assert_eq!(Preset::NoMc.config().mc_samples, 1);
        assert_eq!(Preset::NoRefiners.config().refiners, 0);
        assert_eq!(Preset::NoExtract.config().extract_prob, 0.0);
        assert!("bogus".parse::<Preset>().is_err());
    }
}
