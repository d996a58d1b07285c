//! Built-in run configurations for the standard demonstration curves.

use crate::config::RunConfig;

pub const PRESETS: &[(&str, &str)] = &[
    ("fig3", include_str!("../presets/fig3.json")),
    ("fig4", include_str!("../presets/fig4.json")),
    ("fig6", include_str!("../presets/fig6.json")),
    ("fig7", include_str!("../presets/fig7.json")),
    ("fig8", include_str!("../presets/fig8.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn load(name: &str) -> Result<RunConfig, String> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| format!("unknown preset {name:?}; known: {}", names().collect::<Vec<_>>().join(", ")))?;
    RunConfig::from_json(text)
}
