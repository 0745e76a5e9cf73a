//! Configurations shipped for each reproduced figure and table.

/// `(name, config text)` for every shipped preset.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig3", include_str!("../../../../presets/fig3")),
    ("fig4", include_str!("../../../../presets/fig4")),
    ("fig5a", include_str!("../../../../presets/fig5a")),
    ("fig5b", include_str!("../../../../presets/fig5b")),
    ("fig6", include_str!("../../../../presets/fig6")),
    ("table1", include_str!("../../../../presets/table1")),
];

/// Text of preset `name`; accepts `presets/<name>` too.
pub fn preset(name: &str) -> Option<&'static str> {
    let name = name.trim_start_matches("./").trim_start_matches("presets/");
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// First comment line of a preset, without the `#`.
pub fn preset_summary(text: &str) -> &str {
    text.lines()
        .find_map(|l| l.trim().strip_prefix('#'))
        .map_or("", str::trim)
}
