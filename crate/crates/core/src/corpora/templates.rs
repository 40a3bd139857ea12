//! Instruction/output templates with `{placeholder}` substitution.
//!
//! A template set is a TOML document:
//!
//! ```toml
//! task3_negative = "No, the molecular genetics summary does not support ..."
//!
//! [[template]]
//! id = "t1-what"
//! task = "Task1"
//! instruction = "What is the {attribute} of {gene}?"
//! output = "The {attribute} of {gene} is {value}."
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::knowledge::Attribute;
use crate::reasoning::{TASK3_NEGATIVE, TASK3_POSITIVE};
use crate::task::TaskLabel;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template id `{0}` is used more than once")]
    DuplicateId(String),
    #[error("template `{id}`: placeholder `{{{name}}}` is not available for {task}")]
    UnknownPlaceholder { id: String, task: TaskLabel, name: String },
    #[error("template `{id}`: output must contain `{{{name}}}`")]
    MissingPlaceholder { id: String, name: String },
    #[error("template `{0}`: unbalanced braces")]
    Unbalanced(String),
    #[error("template `{0}`: only Task1 templates may be restricted to an attribute")]
    AttributeOutsideTask1(String),
    #[error("cannot read template set: {0}")]
    Read(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Template {
    pub id: String,
    pub task: TaskLabel,
    pub instruction: String,
    pub output: String,
    /// Task1 only: restrict this phrasing to one attribute.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<Attribute>,
}

impl Template {
    pub fn new(id: &str, task: TaskLabel, instruction: &str, output: &str) -> Self {
        Self {
            id: id.into(),
            task,
            instruction: instruction.into(),
            output: output.into(),
            attribute: None,
        }
    }
}

fn default_negative() -> String {
    TASK3_NEGATIVE.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateSet {
    /// Output for Task 3 genes whose record is not AD-related.
    #[serde(default = "default_negative")]
    pub task3_negative: String,
    #[serde(default, rename = "template")]
    pub templates: Vec<Template>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::standard()
    }
}

fn instruction_placeholders(task: TaskLabel) -> &'static [&'static str] {
    match task {
        TaskLabel::Task1 => &["gene", "attribute"],
        TaskLabel::Task2 => &["gene", "region", "kind"],
        TaskLabel::Task3 => &["gene"],
        TaskLabel::Task4 => &["gene", "region"],
    }
}

fn output_placeholders(task: TaskLabel) -> (&'static [&'static str], &'static [&'static str]) {
    // (allowed beyond the instruction set, required)
    match task {
        TaskLabel::Task1 => (&["value"], &["value"]),
        TaskLabel::Task2 => (&["verdict"], &["verdict"]),
        TaskLabel::Task3 => (&["reasoning"], &["reasoning"]),
        TaskLabel::Task4 => (&["steps", "conclusion"], &["steps", "conclusion"]),
    }
}

/// Names of all `{placeholder}`s in `pattern`, or `None` if braces don't pair up.
pub fn placeholders(pattern: &str) -> Option<Vec<&str>> {
    let mut out = Vec::new();
    let mut rest = pattern;
    while let Some(open) = rest.find(['{', '}']) {
        if rest.as_bytes()[open] == b'}' {
            return None;
        }
        let after = &rest[open + 1..];
        let close = after.find('}')?;
        let name = &after[..close];
        if name.is_empty() || name.contains('{') {
            return None;
        }
        out.push(name);
        rest = &after[close + 1..];
    }
    Some(out)
}

/// Substitutes `{name}` with the matching value; unknown names are left as-is.
pub fn render(pattern: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(pattern.len() + 32);
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let name = &after[..close];
                match values.iter().find(|(k, _)| *k == name) {
                    Some((_, v)) => out.push_str(v),
                    None => {
                        out.push('{');
                        out.push_str(name);
                        out.push('}');
                    }
                }
                rest = &after[close + 1..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

impl TemplateSet {
    pub fn new(templates: Vec<Template>) -> Result<Self, TemplateError> {
        let set = Self {
            task3_negative: default_negative(),
            templates,
        };
        set.validate()?;
        Ok(set)
    }

    /// Three phrasings per task. Task 1 phrasings apply to all five
    /// attributes, giving 15 examples per gene.
    pub fn standard() -> Self {
        use TaskLabel::*;
        let templates = vec![
            Template::new("t1-what", Task1, "What is the {attribute} of {gene}?", "The {attribute} of {gene} is {value}."),
            Template::new("t1-tell", Task1, "Tell me the {attribute} of the gene {gene}.", "For the gene {gene}, the {attribute} is {value}."),
            Template::new("t1-provide", Task1, "Could you provide the {attribute} for {gene}?", "The {attribute} for {gene} is {value}."),
            Template::new(
                "t2-contain",
                Task2,
                "Does the gene {gene} contain variants in the {region} that significantly influence {kind}?",
                "{verdict}",
            ),
            Template::new(
                "t2-harbor",
                Task2,
                "In the {region}, does {gene} harbor any variant with a significant effect on {kind}?",
                "{verdict}",
            ),
            Template::new(
                "t2-affect",
                Task2,
                "Are there variants of {gene} that significantly affect {kind} in the {region}?",
                "{verdict}",
            ),
            Template::new(
                "t3-determine",
                Task3,
                "Determine if {gene} has a potential role in Alzheimer's disease based on the molecular genetics summary.",
                TASK3_POSITIVE,
            ),
            Template::new(
                "t3-evidence",
                Task3,
                "Based on its molecular genetics summary, is {gene} potentially involved in Alzheimer's disease?",
                TASK3_POSITIVE,
            ),
            Template::new(
                "t3-relation",
                Task3,
                "Does the molecular genetics evidence suggest a relation between {gene} and Alzheimer's disease?",
                TASK3_POSITIVE,
            ),
            Template::new("t4-related", Task4, "Is the {region} related to AD with regard to gene {gene}?", "{steps}\n{conclusion}"),
            Template::new(
                "t4-link",
                Task4,
                "With respect to gene {gene}, is the {region} linked to Alzheimer's disease?",
                "{steps}\n{conclusion}",
            ),
            Template::new(
                "t4-connect",
                Task4,
                "Considering gene {gene}, does the {region} have a connection to AD?",
                "{steps}\n{conclusion}",
            ),
        ];
        Self::new(templates).expect("standard templates are valid")
    }

    /// Alternative phrasings disjoint from [`Self::standard`], for testing
    /// how the router generalises to unseen wording.
    pub fn paraphrases() -> Self {
        use TaskLabel::*;
        let templates = vec![
            Template::new("p1-need", Task1, "I need the {attribute} of {gene}.", "The {attribute} of {gene} is {value}."),
            Template::new("p1-report", Task1, "Report the {attribute} recorded for {gene}.", "The recorded {attribute} is {value}."),
            Template::new(
                "p2-influenced",
                Task2,
                "Is {kind} of {gene} significantly influenced by variants in the {region}?",
                "{verdict}",
            ),
            Template::new(
                "p2-within",
                Task2,
                "Do variants in {gene} significantly influence {kind} within the {region}?",
                "{verdict}",
            ),
            Template::new(
                "p3-support",
                Task3,
                "Is there molecular genetics support for {gene} playing a role in Alzheimer's disease?",
                TASK3_POSITIVE,
            ),
            Template::new(
                "p3-could",
                Task3,
                "Could {gene} have a potential role in Alzheimer's disease according to its molecular genetics summary?",
                TASK3_POSITIVE,
            ),
            Template::new(
                "p4-through",
                Task4,
                "Is there a relationship between the {region} and AD through gene {gene}?",
                "{steps}\n{conclusion}",
            ),
            Template::new(
                "p4-relate",
                Task4,
                "Is the {region} related to Alzheimer's disease when considering gene {gene}?",
                "{steps}\n{conclusion}",
            ),
        ];
        Self::new(templates).expect("paraphrase templates are valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, TemplateError> {
        let set: Self = toml::from_str(text).map_err(|e| TemplateError::Read(e.to_string()))?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TemplateError> {
        let text = std::fs::read_to_string(path).map_err(|e| TemplateError::Read(e.to_string()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("template set serialises")
    }

    pub fn for_task(&self, task: TaskLabel) -> impl Iterator<Item = &Template> {
        self.templates.iter().filter(move |t| t.task == task)
    }

    pub fn validate(&self) -> Result<(), TemplateError> {
        let mut ids = BTreeSet::new();
        for t in &self.templates {
            if !ids.insert(t.id.as_str()) {
                return Err(TemplateError::DuplicateId(t.id.clone()));
            }
            if t.attribute.is_some() && t.task != TaskLabel::Task1 {
                return Err(TemplateError::AttributeOutsideTask1(t.id.clone()));
            }
            let allowed_in = instruction_placeholders(t.task);
            let (extra_out, required_out) = output_placeholders(t.task);
            let check = |pattern: &str, allowed: &dyn Fn(&str) -> bool| -> Result<(), TemplateError> {
                let names = placeholders(pattern).ok_or_else(|| TemplateError::Unbalanced(t.id.clone()))?;
                match names.into_iter().find(|n| !allowed(n)) {
                    Some(bad) => Err(TemplateError::UnknownPlaceholder {
                        id: t.id.clone(),
                        task: t.task,
                        name: bad.to_string(),
                    }),
                    None => Ok(()),
                }
            };
            check(&t.instruction, &|n| allowed_in.contains(&n))?;
            check(&t.output, &|n| allowed_in.contains(&n) || extra_out.contains(&n))?;
            let out_names = placeholders(&t.output).unwrap_or_default();
            if let Some(missing) = required_out.iter().find(|r| !out_names.contains(r)) {
                return Err(TemplateError::MissingPlaceholder {
                    id: t.id.clone(),
                    name: (*missing).to_string(),
                });
            }
        }
        match placeholders(&self.task3_negative) {
            Some(names) if names.iter().all(|n| *n == "gene") => Ok(()),
            Some(names) => Err(TemplateError::UnknownPlaceholder {
                id: "task3_negative".into(),
                task: TaskLabel::Task3,
                name: names.into_iter().find(|n| *n != "gene").unwrap_or_default().to_string(),
            }),
            None => Err(TemplateError::Unbalanced("task3_negative".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_substitutes_known_names() {
        let s = render(
            "What is the {attribute} of {gene}? {other}",
            &[("attribute", "start position"), ("gene", "GENEA")],
        );
        assert_eq!(s, "What is the start position of GENEA? {other}");
        assert_eq!(render("no braces", &[]), "no braces");
        assert_eq!(render("dangling {x", &[("x", "y")]), "dangling {x");
    }

    #[test]
    fn placeholder_scan() {
        assert_eq!(placeholders("a {b} c {d}"), Some(vec!["b", "d"]));
        assert_eq!(placeholders("a } b"), None);
        assert_eq!(placeholders("a {b"), None);
        assert_eq!(placeholders("a {} b"), None);
    }

    #[test]
    fn standard_set_shape() {
        let set = TemplateSet::standard();
        for task in TaskLabel::ALL {
            assert_eq!(set.for_task(task).count(), 3, "{task}");
        }
        assert_eq!(set.task3_negative, TASK3_NEGATIVE);
        TemplateSet::paraphrases().validate().unwrap();
        let std_instr: BTreeSet<_> = set.templates.iter().map(|t| &t.instruction).collect();
        assert!(TemplateSet::paraphrases()
            .templates
            .iter()
            .all(|t| !std_instr.contains(&t.instruction)));
    }

    #[test]
    fn validation_errors() {
        let dup = vec![
            Template::new("a", TaskLabel::Task3, "{gene}?", TASK3_POSITIVE),
            Template::new("a", TaskLabel::Task3, "{gene}!", TASK3_POSITIVE),
        ];
        assert_eq!(TemplateSet::new(dup), Err(TemplateError::DuplicateId("a".into())));

        let region_in_task3 = vec![Template::new(
            "a",
            TaskLabel::Task3,
            "{gene} in {region}?",
            TASK3_POSITIVE,
        )];
        assert!(matches!(
            TemplateSet::new(region_in_task3),
            Err(TemplateError::UnknownPlaceholder { .. })
        ));

        let no_value = vec![Template::new("a", TaskLabel::Task1, "{gene} {attribute}?", "{gene}")];
        assert!(matches!(
            TemplateSet::new(no_value),
            Err(TemplateError::MissingPlaceholder { .. })
        ));

        let unbalanced = vec![Template::new("a", TaskLabel::Task2, "{gene {region}", "{verdict}")];
        assert!(matches!(
            TemplateSet::new(unbalanced),
            Err(TemplateError::Unbalanced(_))
        ));

        let mut t = Template::new("a", TaskLabel::Task2, "{gene} {region} {kind}", "{verdict}");
        t.attribute = Some(Attribute::Start);
        assert!(matches!(
            TemplateSet::new(vec![t]),
            Err(TemplateError::AttributeOutsideTask1(_))
        ));
    }

    #[test]
    fn toml_round_trip() {
        let set = TemplateSet::standard();
        let back = TemplateSet::from_toml(&set.to_toml()).unwrap();
        assert_eq!(back, set);

        let text = r#"
[[template]]
id = "only-start"
task = "Task1"
instruction = "What is the start position of {gene}?"
output = "{value}"
attribute = "start"
"#;
        let set = TemplateSet::from_toml(text).unwrap();
        assert_eq!(set.templates[0].attribute, Some(Attribute::Start));
        assert_eq!(set.task3_negative, TASK3_NEGATIVE);
    }
}
