/// Characters that may appear in a URL, the expansion of `\e`.
const URL_PUNCT: &str = "._~:/?#@!$&'()*+,;=%-";

/// The alphabet: printable ASCII plus tab and newline.
pub fn in_alphabet(c: char) -> bool {
    matches!(c, ' '..='~' | '\t' | '\n')
}

/// The shorthand macros of the dialect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shorthand {
    /// `\S`: any alphabet character except space, tab and newline.
    NonSpace,
    /// `\e`: characters that occur in URLs.
    Url,
    /// `\w`: `[a-zA-Z0-9_]`
    Word,
    /// `\d`: `[0-9]`
    Digit,
    /// `.`: any alphabet character except newline.
    Any,
}

impl Shorthand {
    pub fn contains(self, c: char) -> bool {
        match self {
            Shorthand::NonSpace => in_alphabet(c) && !matches!(c, ' ' | '\t' | '\n'),
            Shorthand::Url => c.is_ascii_alphanumeric() || URL_PUNCT.contains(c),
            Shorthand::Word => c.is_ascii_alphanumeric() || c == '_',
            Shorthand::Digit => c.is_ascii_digit(),
            Shorthand::Any => in_alphabet(c) && c != '\n',
        }
    }

    /// Printed form, outside or inside brackets.
    pub fn as_str(self) -> &'static str {
        match self {
            Shorthand::NonSpace => "\\S",
            Shorthand::Url => "\\e",
            Shorthand::Word => "\\w",
            Shorthand::Digit => "\\d",
            Shorthand::Any => ".",
        }
    }

    /// Escape letter for the backslash forms.
    pub(crate) fn from_escape(c: char) -> Option<Shorthand> {
        match c {
            'S' => Some(Shorthand::NonSpace),
            'e' => Some(Shorthand::Url),
            'w' => Some(Shorthand::Word),
            'd' => Some(Shorthand::Digit),
            _ => None,
        }
    }

    /// Every alphabet character the macro accepts, in code-point order.
    pub fn chars(self) -> Vec<char> {
        (0u8..=127)
            .map(char::from)
            .filter(|&c| in_alphabet(c) && self.contains(c))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn macro_sizes() {
        assert_eq!(Shorthand::Digit.chars().len(), 10);
        assert_eq!(Shorthand::Word.chars().len(), 63);
        // 95 printable + tab + newline, minus space/tab/newline
        assert_eq!(Shorthand::NonSpace.chars().len(), 94);
        assert_eq!(Shorthand::Any.chars().len(), 96);
        assert_eq!(Shorthand::Url.chars().len(), 62 + URL_PUNCT.len());
    }

    #[test]
    fn url_excludes_space() {
        assert!(!Shorthand::Url.contains(' '));
        assert!(Shorthand::Url.contains('/'));
        assert!(Shorthand::Url.contains('-'));
    }
}
