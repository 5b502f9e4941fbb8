//! The growing program file and code extraction from model responses.

use serde::{Deserialize, Serialize};

/// Accumulated program text. Code from each response is appended, never
/// replacing earlier code, so helpers defined in earlier rounds stay callable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramSource {
    pub text: String,
    /// Response rounds that contributed code, in append order.
    pub origins: Vec<usize>,
}

impl ProgramSource {
    pub fn is_empty(&self) -> bool {
        self.text.trim().is_empty()
    }

    pub fn len(&self) -> usize {
        self.text.len()
    }
}

const DEFINITION_KEYWORDS: [&str; 6] = ["def ", "import ", "from ", "class ", "async def ", "@"];

/// Fenced code blocks in order. A response without fences counts as code only
/// when it starts with a definition keyword.
pub fn extract_code(response: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in response.lines() {
        let fence = line.trim_start().starts_with("```");
        match (&mut current, fence) {
            (None, true) => current = Some(Vec::new()),
            (Some(body), true) => {
                blocks.push(body.join("\n"));
                current = None;
            }
            (Some(body), false) => body.push(line),
            (None, false) => {}
        }
    }
    // An unterminated fence still holds code.
    if let Some(body) = current {
        blocks.push(body.join("\n"));
    }
    blocks.retain(|b| !b.trim().is_empty());
    if blocks.is_empty() {
        let trimmed = response.trim_start();
        if DEFINITION_KEYWORDS.iter().any(|k| trimmed.starts_with(k)) {
            blocks.push(response.trim().to_owned());
        }
    }
    blocks
}

/// Append the code in `response` under a round header. Returns the number of
/// blocks appended; a response with no code leaves the program unchanged.
pub fn accumulate(program: &mut ProgramSource, response: &str, round: usize) -> usize {
    let blocks = extract_code(response);
    if blocks.is_empty() {
        log::warn!("response {round} contains no code; program unchanged");
        return 0;
    }
    if !program.text.is_empty() && !program.text.ends_with('\n') {
        program.text.push('\n');
    }
    if !program.text.is_empty() {
        program.text.push('\n');
    }
    program.text.push_str(&format!("# --- response {round} ---\n"));
    for block in &blocks {
        program.text.push_str(block.trim_end());
        program.text.push_str("\n\n");
    }
    program.origins.push(round);
    blocks.len()
}
