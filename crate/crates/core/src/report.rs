//! Line-oriented `key: value` reports with a fixed key order.

use std::fmt::Write as _;

/// An ordered list of report entries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new(kind: &str) -> Self {
        let mut r = Self::default();
        r.text("report", kind);
        r
    }

    pub fn text(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.entries.push((key.to_string(), value.into()));
        self
    }

    /// Floats use scientific notation with the shortest round-trip digits.
    pub fn float(&mut self, key: &str, value: f64) -> &mut Self {
        self.text(key, format!("{value:e}"))
    }

    pub fn int(&mut self, key: &str, value: impl Into<i128>) -> &mut Self {
        self.text(key, value.into().to_string())
    }

    pub fn flag(&mut self, key: &str, value: bool) -> &mut Self {
        self.text(key, value.to_string())
    }

    pub fn floats(&mut self, key: &str, values: &[f64]) -> &mut Self {
        let v: Vec<String> = values.iter().map(|x| format!("{x:e}")).collect();
        self.text(key, v.join(" "))
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn extend(&mut self, prefix: &str, other: &Report) -> &mut Self {
        for (k, v) in &other.entries {
            self.entries.push((format!("{prefix}.{k}"), v.clone()));
        }
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}: {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_in_insertion_order() {
        let mut r = Report::new("demo");
        r.float("b", 0.1).int("a", 3).flag("ok", true);
        assert_eq!(r.render(), "report: demo\nb: 1e-1\na: 3\nok: true\n");
        assert_eq!(r.get("a"), Some("3"));
    }
}
