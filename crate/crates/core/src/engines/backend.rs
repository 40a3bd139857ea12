//! Port for the text generator that phrases engine answers.

use serde::Serialize;

use crate::task::TaskLabel;

/// What an engine hands to the backend: the user's query, a grounded draft
/// answer and the knowledge-base facts that must survive unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BackendPrompt<'a> {
    pub task: TaskLabel,
    pub query: &'a str,
    pub draft: &'a str,
    pub facts: Vec<&'a str>,
}

impl BackendPrompt<'_> {
    /// Flat text rendering for backends that take a single prompt string.
    pub fn render(&self) -> String {
        let mut s = format!("Task: {}\nQuestion: {}\nFacts:\n", self.task, self.query);
        for f in &self.facts {
            s.push_str("- ");
            s.push_str(f);
            s.push('\n');
        }
        s.push_str("Draft answer:\n");
        s.push_str(self.draft);
        s
    }
}

pub trait GenerativeBackend: Send + Sync {
    fn name(&self) -> &str;
    fn generate(&self, prompt: &BackendPrompt<'_>) -> String;
}

/// Returns the grounded draft verbatim.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GroundedTemplateBackend;

impl GroundedTemplateBackend {
    pub const NAME: &'static str = "grounded-template";
}

impl GenerativeBackend for GroundedTemplateBackend {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn generate(&self, prompt: &BackendPrompt<'_>) -> String {
        prompt.draft.to_string()
    }
}

/// Looks up a backend by its configured name.
pub fn backend_by_name(name: &str) -> Option<Box<dyn GenerativeBackend>> {
    match name {
        GroundedTemplateBackend::NAME => Some(Box::new(GroundedTemplateBackend)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_backend_echoes_draft() {
        let p = BackendPrompt {
            task: TaskLabel::Task3,
            query: "q",
            draft: "Yes, because.",
            facts: vec!["because"],
        };
        let b = backend_by_name("grounded-template").unwrap();
        assert_eq!(b.generate(&p), "Yes, because.");
        assert!(p.render().contains("- because\n"));
        assert!(backend_by_name("gpt").is_none());
    }
}
