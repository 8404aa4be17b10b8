//! Palettes shipped by common charting tools, used as experiment material
//! and as the designer baseline.

use crate::colorlab::Rgb;

#[derive(Debug, Clone)]
pub struct DesignerPalette {
    pub name: &'static str,
    pub colors: Vec<Rgb>,
    /// Default marker shapes of the same tool, by catalog name.
    pub shapes: &'static [&'static str],
}

fn hexes(list: &[&str]) -> Vec<Rgb> {
    list.iter().map(|h| Rgb::from_hex(h).expect("static palette")).collect()
}

/// The four 10-color palettes used for the encoding comparison and
/// palette-interaction designs, in their conventional order.
pub fn designer_color_palettes() -> Vec<DesignerPalette> {
    vec![
        DesignerPalette {
            name: "colorbrewer-paired",
            colors: hexes(&[
                "#a6cee3", "#1f78b4", "#b2df8a", "#33a02c", "#fb9a99", "#e31a1c", "#fdbf6f", "#ff7f00", "#cab2d6",
                "#6a3d9a",
            ]),
            shapes: &[],
        },
        DesignerPalette {
            name: "tableau-10",
            colors: hexes(&[
                "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f",
                "#bab0ac",
            ]),
            shapes: &[
                "circle",
                "square",
                "plus",
                "times",
                "diamond",
                "triangle-up",
                "triangle-down",
                "circle-outline",
                "square-outline",
                "diamond-outline",
            ],
        },
        DesignerPalette {
            name: "stata-s2",
            colors: hexes(&[
                "#1a476f", "#90353b", "#55752f", "#e37e00", "#6e8e84", "#c10534", "#938dd2", "#cac27e", "#a0522d",
                "#7b92a8",
            ]),
            shapes: &[],
        },
        DesignerPalette {
            name: "carto-pastel",
            colors: hexes(&[
                "#66c5cc", "#f6cf71", "#f89c74", "#dcb0f2", "#87c55f", "#9eb9f3", "#fe88b1", "#c9db74", "#8be0a4",
                "#b497e7",
            ]),
            shapes: &[],
        },
    ]
}

/// Color and shape defaults of four charting tools; the baseline report
/// pairs them at random.
pub fn designer_tool_palettes() -> Vec<DesignerPalette> {
    vec![
        DesignerPalette {
            name: "d3",
            colors: hexes(&[
                "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
                "#17becf",
            ]),
            shapes: &["circle", "cross", "diamond", "square", "star", "triangle-up", "wye"],
        },
        DesignerPalette {
            name: "excel",
            colors: hexes(&[
                "#4472c4", "#ed7d31", "#a5a5a5", "#ffc000", "#5b9bd5", "#70ad47", "#264478", "#9e480e", "#636363",
                "#997300",
            ]),
            shapes: &[
                "diamond",
                "square",
                "triangle-up",
                "times",
                "asterisk",
                "circle",
                "plus",
                "dash",
                "pipe",
                "tripod",
            ],
        },
        DesignerPalette {
            name: "matlab",
            colors: hexes(&["#0072bd", "#d95319", "#edb120", "#7e2f8e", "#77ac30", "#4dbeee", "#a2142f"]),
            shapes: &[
                "circle-outline",
                "plus",
                "asterisk",
                "times",
                "square-outline",
                "diamond-outline",
                "triangle-up-outline",
                "triangle-down-outline",
                "triangle-right-outline",
                "triangle-left-outline",
                "pentagon-outline",
                "hexagon-outline",
            ],
        },
        designer_color_palettes().swap_remove(1),
    ]
}

/// Six-shape palettes for the palette-interaction design: one per fill class
/// and three mixed ones.
pub fn experiment_shape_palettes() -> Vec<(&'static str, [&'static str; 6])> {
    vec![
        ("filled", ["circle", "square", "diamond", "triangle-up", "star", "cross"]),
        (
            "unfilled",
            [
                "circle-outline",
                "square-outline",
                "diamond-outline",
                "triangle-up-outline",
                "star-outline",
                "cross-outline",
            ],
        ),
        ("open", ["plus", "times", "asterisk", "dash", "caret-up", "tripod"]),
        ("mixed-a", ["circle", "square-outline", "plus", "triangle-down", "diamond-outline", "times"]),
        ("mixed-b", ["square", "circle-outline", "asterisk", "star", "triangle-up-outline", "caret-down"]),
        ("mixed-c", ["diamond", "hexagon-outline", "check", "wye", "bowtie-outline", "equals"]),
    ]
}
