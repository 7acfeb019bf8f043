use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::mda::{FillMode, MdaConfig};
use crate::rng::derive_seed;

/// One augmentation variant.
#[derive(Debug, Clone, PartialEq)]
pub enum Descriptor {
    /// Informative subcarrier selection with a different K.
    FdaIss {
        k: usize,
    },
    /// Base selection plus the `top` strongest motion-weighted group mixes.
    FdaGsm {
        g_count: usize,
        top: usize,
        seed: u64,
    },
    /// Base channels regenerated with another STFT window length.
    Tda {
        window_len: usize,
    },
    MdaErase(MdaConfig),
    MdaShift {
        seed: u64,
    },
}

impl Descriptor {
    pub fn kind(&self) -> &'static str {
        match self {
            Descriptor::FdaIss { .. } => "iss",
            Descriptor::FdaGsm { .. } => "gsm",
            Descriptor::Tda { .. } => "tda",
            Descriptor::MdaErase(_) => "mre",
            Descriptor::MdaShift { .. } => "mrs",
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Descriptor::FdaIss { k } => write!(f, "iss(k={k})"),
            Descriptor::FdaGsm { g_count, top, seed } => {
                write!(f, "gsm(g={g_count},top={top},seed={seed})")
            }
            Descriptor::Tda { window_len } => write!(f, "tda(window={window_len})"),
            Descriptor::MdaErase(c) => write!(
                f,
                "mre(min={:?},max={:?},fill={},seed={})",
                c.erase_min_frac,
                c.erase_max_frac,
                c.fill.name(),
                c.rng_seed
            ),
            Descriptor::MdaShift { seed } => write!(f, "mrs(seed={seed})"),
        }
    }
}

fn parse_params(body: &str) -> Result<BTreeMap<&str, &str>> {
    let mut out = BTreeMap::new();
    if body.is_empty() {
        return Ok(out);
    }
    for part in body.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::arg(format!("descriptor parameter {part:?} is not key=value")))?;
        if out.insert(k, v).is_some() {
            return Err(Error::arg(format!("duplicate descriptor parameter {k:?}")));
        }
    }
    Ok(out)
}

fn take<T: FromStr>(params: &mut BTreeMap<&str, &str>, key: &str) -> Result<T> {
    let raw = params
        .remove(key)
        .ok_or_else(|| Error::arg(format!("descriptor is missing {key}")))?;
    raw.parse()
        .map_err(|_| Error::arg(format!("descriptor parameter {key}={raw:?} is invalid")))
}

impl FromStr for Descriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s
            .split_once('(')
            .ok_or_else(|| Error::arg(format!("malformed descriptor {s:?}")))?;
        let body = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::arg(format!("malformed descriptor {s:?}")))?;
        let mut p = parse_params(body)?;
        let d = match name {
            "iss" => Descriptor::FdaIss {
                k: take(&mut p, "k")?,
            },
            "gsm" => Descriptor::FdaGsm {
                g_count: take(&mut p, "g")?,
                top: take(&mut p, "top")?,
                seed: take(&mut p, "seed")?,
            },
            "tda" => Descriptor::Tda {
                window_len: take(&mut p, "window")?,
            },
            "mre" => Descriptor::MdaErase(MdaConfig {
                erase_min_frac: take(&mut p, "min")?,
                erase_max_frac: take(&mut p, "max")?,
                fill: take::<String>(&mut p, "fill")?.parse::<FillMode>()?,
                rng_seed: take(&mut p, "seed")?,
            }),
            "mrs" => Descriptor::MdaShift {
                seed: take(&mut p, "seed")?,
            },
            other => return Err(Error::arg(format!("unknown descriptor kind {other:?}"))),
        };
        if let Some(k) = p.keys().next() {
            return Err(Error::arg(format!("unexpected descriptor parameter {k:?}")));
        }
        Ok(d)
    }
}

/// Ordered augmentation variants; the augmentation ratio is their count.
#[derive(Debug, Clone, PartialEq)]
pub struct AugPlan {
    pub seed: u64,
    pub descriptors: Vec<Descriptor>,
}

impl AugPlan {
    pub fn aratio(&self) -> usize {
        self.descriptors.len()
    }
}

/// Expands the requested per-policy counts into seeded descriptors.
pub fn build_plan(cfg: &PipelineConfig, seed: u64) -> Result<AugPlan> {
    cfg.validate()?;
    let plan = &cfg.plan;
    let mut kinds: Vec<&str> = Vec::new();
    kinds.extend(std::iter::repeat_n("gsm", plan.gsm));
    kinds.extend(std::iter::repeat_n("tda", plan.tda));
    kinds.extend((0..plan.mda).map(|i| if i % 2 == 0 { "mre" } else { "mrs" }));
    kinds.extend(std::iter::repeat_n("mre", plan.mre));
    kinds.extend(std::iter::repeat_n("mrs", plan.mrs));

    let mut descriptors: Vec<Descriptor> =
        plan.iss.iter().map(|&k| Descriptor::FdaIss { k }).collect();
    let alternates = cfg.windows.alternates();
    let mut tda_used = 0;
    for kind in kinds {
        let slot_seed = derive_seed(seed, &format!("plan/{}", descriptors.len()));
        descriptors.push(match kind {
            "gsm" => Descriptor::FdaGsm {
                g_count: cfg.fda.g_count,
                top: cfg.fda.top,
                seed: slot_seed,
            },
            "tda" => {
                tda_used += 1;
                Descriptor::Tda {
                    window_len: alternates[tda_used - 1],
                }
            }
            "mre" => Descriptor::MdaErase(MdaConfig {
                rng_seed: slot_seed,
                ..cfg.mda.clone()
            }),
            _ => Descriptor::MdaShift { seed: slot_seed },
        });
    }
    Ok(AugPlan { seed, descriptors })
}
