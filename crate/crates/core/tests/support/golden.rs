//! Normalization for comparing rendered prompts with the TeX-typeset
//! reference prompts: markup stripped, whitespace collapsed, and spacing
//! after colons removed.

pub fn normalize(text: &str) -> String {
    let mut s = text.to_string();
    for (from, to) in [
        ("\\textbf{", ""),
        ("\\texttt{", ""),
        ("\\mu", "μ"),
        ("\\sigma", "σ"),
        ("\\\\", " "),
        ("``", ""),
        ("''", ""),
        ("$", ""),
        ("}", ""),
    ] {
        s = s.replace(from, to);
    }
    let collapsed = s.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed.replace(": ", ":")
}
