//! Parameter sets shipped with the crate, in the user config format.

use crate::config::Config;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub text: &'static str,
}

impl Preset {
    pub fn config(&self) -> Config {
        Config::parse(self.text).expect("shipped presets parse")
    }

    pub fn description(&self) -> &'static str {
        self.field("description")
    }

    pub fn provenance(&self) -> &'static str {
        self.field("provenance")
    }

    fn field(&self, key: &str) -> &'static str {
        self.text
            .lines()
            .filter_map(|l| l.split_once('='))
            .find(|(k, _)| k.trim() == key)
            .map(|(_, v)| v.trim())
            .unwrap_or("")
    }
}

const PRESETS: [Preset; 6] = [
    Preset {
        name: "fig2",
        text: include_str!("../presets/fig2.conf"),
    },
    Preset {
        name: "ingap-ring",
        text: include_str!("../presets/ingap-ring.conf"),
    },
    Preset {
        name: "ingap-wg",
        text: include_str!("../presets/ingap-wg.conf"),
    },
    Preset {
        name: "satellite",
        text: include_str!("../presets/satellite.conf"),
    },
    Preset {
        name: "symmetric",
        text: include_str!("../presets/symmetric.conf"),
    },
    Preset {
        name: "lnoi-ring",
        text: include_str!("../presets/lnoi-ring.conf"),
    },
];

pub fn list_presets() -> Vec<Preset> {
    PRESETS.to_vec()
}

pub fn find_preset(name: &str) -> Result<Preset> {
    PRESETS.iter().copied().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        Error::config(
            "preset",
            format!("unknown preset `{name}`; available: {}", names.join(", ")),
        )
    })
}
