use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Fully-resolved invocation written next to a run's outputs. Replaying it
/// rebuilds the original argument list.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunConfig {
    pub command: Vec<String>,
    pub inputs: Vec<String>,
    pub options: Vec<(String, String)>,
}

impl RunConfig {
    pub fn new(command: &[&str]) -> Self {
        Self { command: command.iter().map(|s| s.to_string()).collect(), ..Self::default() }
    }

    pub fn input(mut self, path: impl AsRef<Path>) -> Self {
        self.inputs.push(path.as_ref().display().to_string());
        self
    }

    pub fn option(mut self, key: &str, value: impl ToString) -> Self {
        self.options.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn maybe(self, key: &str, value: Option<impl ToString>) -> Self {
        match value {
            Some(v) => self.option(key, v),
            None => self,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "command = {}", self.command.join(" ")).unwrap();
        for (i, input) in self.inputs.iter().enumerate() {
            writeln!(out, "input.{i} = {input}").unwrap();
        }
        for (k, v) in &self.options {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut config = Self::default();
        let mut inputs: Vec<(usize, String)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "command" {
                config.command = value.split_whitespace().map(str::to_owned).collect();
            } else if let Some(i) = key.strip_prefix("input.") {
                let i = i.parse().map_err(|_| format!("line {}: bad input index `{i}`", lineno + 1))?;
                inputs.push((i, value.to_owned()));
            } else {
                config.options.push((key.to_owned(), value.to_owned()));
            }
        }
        if config.command.is_empty() {
            return Err("missing `command` entry".into());
        }
        inputs.sort();
        config.inputs = inputs.into_iter().map(|(_, v)| v).collect();
        Ok(config)
    }

    /// Argument list equivalent to this configuration. Boolean options
    /// become bare flags when `true` and are dropped when `false`.
    pub fn to_args(&self) -> Vec<String> {
        let mut args = self.command.clone();
        for (k, v) in &self.options {
            match v.as_str() {
                "true" => args.push(format!("--{k}")),
                "false" => {}
                _ => {
                    args.push(format!("--{k}"));
                    args.push(v.clone());
                }
            }
        }
        args.extend(self.inputs.iter().cloned());
        args
    }

    pub fn write_next_to(&self, output: &Path) -> std::io::Result<PathBuf> {
        let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".config");
        let path = output.with_file_name(name);
        std::fs::write(&path, self.to_text())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        let c = RunConfig::new(&["eval", "classify"])
            .input("emb.txt")
            .input("labels.txt")
            .option("seed", 7)
            .option("weighted", false)
            .option("json", "out dir/report.json");
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        assert_eq!(
            c.to_args(),
            ["eval", "classify", "--seed", "7", "--json", "out dir/report.json", "emb.txt", "labels.txt"]
        );
    }

    #[test]
    fn missing_command_rejected() {
        assert!(RunConfig::parse("seed = 1\n").is_err());
        assert!(RunConfig::parse("command = sample\nnonsense\n").is_err());
    }
}
