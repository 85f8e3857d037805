pub mod lexer;
pub mod parser;
pub mod printer;

pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::{
    parse_declaration, parse_expression, parse_items_source, parse_program, parse_source,
    parse_statement, Item, ParseError, SourceProgram, SyntaxError,
};
pub use printer::pretty_print;
