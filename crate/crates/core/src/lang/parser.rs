// SPDX-License-Identifier: Apache-2.0

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{ParseError, SyntaxError, MAX_SOURCE_BYTES};

/// Parses a whole unit. The result is syntactically valid but not typechecked.
pub fn parse_unit(source: &str) -> Result<SourceUnit, ParseError> {
    if source.len() > MAX_SOURCE_BYTES {
        return Err(ParseError::SourceTooLarge {
            size: source.len(),
            limit: MAX_SOURCE_BYTES,
        });
    }
    let tokens = tokenize(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        next_id: 0,
    };
    let mut functions = Vec::new();
    while !p.at(&Tok::Eof) {
        functions.push(p.function()?);
    }
    let line_count = source.lines().count().max(1) as u32;
    Ok(SourceUnit {
        name: "unit".to_string(),
        source: source.to_string(),
        functions,
        line_count,
        expr_count: p.next_id,
    })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    next_id: u32,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn at(&self, tok: &Tok) -> bool {
        &self.peek().tok == tok
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> SyntaxError {
        let t = self.peek();
        SyntaxError::new(
            t.span.line,
            t.span.col,
            format!("expected {expected}, found {}", t.tok.describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if self.at(&tok) {
            Ok(self.advance())
        } else {
            Err(self.error_here(&tok.describe()))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match &self.peek().tok {
            Tok::Ident(name) => {
                let name = name.clone();
                let span = self.advance().span;
                Ok((name, span))
            }
            _ => Err(self.error_here("identifier")),
        }
    }

    fn ty(&mut self) -> PResult<(Type, Span)> {
        match self.peek().tok {
            Tok::TyInt => {
                let start = self.advance().span;
                if self.at(&Tok::LBracket) {
                    self.advance();
                    let end = self.expect(Tok::RBracket)?.span;
                    Ok((Type::IntArray, start.to(end)))
                } else {
                    Ok((Type::Int, start))
                }
            }
            Tok::TyBool => Ok((Type::Bool, self.advance().span)),
            _ => Err(self.error_here("type")),
        }
    }

    fn function(&mut self) -> PResult<FunctionDecl> {
        let start = self.expect(Tok::Fun)?.span;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                let (pname, pspan) = self.ident()?;
                self.expect(Tok::Colon)?;
                let (ty, tspan) = self.ty()?;
                params.push(Param {
                    name: pname,
                    ty,
                    span: pspan.to(tspan),
                });
                if self.at(&Tok::Comma) {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Arrow)?;
        let (return_type, _) = self.ty()?;
        let body = self.block()?;
        Ok(FunctionDecl {
            name,
            params,
            return_type,
            span: start.to(body.span),
            body,
        })
    }

    fn block(&mut self) -> PResult<Block> {
        let start = self.expect(Tok::LBrace)?.span;
        let mut stmts = Vec::new();
        while !self.at(&Tok::RBrace) {
            if self.at(&Tok::Eof) {
                return Err(self.error_here("`}`"));
            }
            stmts.push(self.stmt()?);
        }
        let end = self.advance().span;
        Ok(Block {
            stmts,
            span: start.to(end),
        })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.peek().span;
        let kind = match self.peek().tok.clone() {
            Tok::Var => {
                self.advance();
                let (name, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let (ty, _) = self.ty()?;
                self.expect(Tok::Assign)?;
                let init = self.expr()?;
                let end = self.expect(Tok::Semi)?.span;
                return Ok(Stmt {
                    kind: StmtKind::VarDecl { name, ty, init },
                    span: start.to(end),
                });
            }
            Tok::Ident(name) => {
                self.advance();
                if self.at(&Tok::LBracket) {
                    self.advance();
                    let index = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    self.expect(Tok::Assign)?;
                    let value = self.expr()?;
                    StmtKind::ArrayAssign { name, index, value }
                } else if self.at(&Tok::Assign) {
                    self.advance();
                    let value = self.expr()?;
                    StmtKind::Assign { name, value }
                } else {
                    return Err(self.error_here("`=` or `[`"));
                }
            }
            Tok::If => return self.if_stmt(),
            Tok::While => {
                self.advance();
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let body = self.block()?;
                let span = start.to(body.span);
                return Ok(Stmt {
                    kind: StmtKind::While { cond, body },
                    span,
                });
            }
            Tok::Return => {
                self.advance();
                StmtKind::Return(self.expr()?)
            }
            _ => return Err(self.error_here("statement")),
        };
        let end = self.expect(Tok::Semi)?.span;
        Ok(Stmt {
            kind,
            span: start.to(end),
        })
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let start = self.expect(Tok::If)?.span;
        self.expect(Tok::LParen)?;
        let cond = self.expr()?;
        self.expect(Tok::RParen)?;
        let then_block = self.block()?;
        let mut end = then_block.span;
        let else_block = if self.at(&Tok::Else) {
            self.advance();
            if self.at(&Tok::If) {
                // `else if` is sugar for an else block holding one if statement.
                let nested = self.if_stmt()?;
                end = nested.span;
                Some(Block {
                    span: nested.span,
                    stmts: vec![nested],
                })
            } else {
                let b = self.block()?;
                end = b.span;
                Some(b)
            }
        } else {
            None
        };
        Ok(Stmt {
            kind: StmtKind::If {
                cond,
                then_block,
                else_block,
            },
            span: start.to(end),
        })
    }

    fn mk(&mut self, kind: ExprKind, span: Span, anchor: Pos) -> Expr {
        let id = ExprId(self.next_id);
        self.next_id += 1;
        Expr {
            id,
            kind,
            span,
            anchor,
        }
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary_op(tok: &Tok) -> Option<BinaryOp> {
        Some(match tok {
            Tok::OrOr => BinaryOp::Or,
            Tok::AndAnd => BinaryOp::And,
            Tok::EqEq => BinaryOp::Eq,
            Tok::Ne => BinaryOp::Ne,
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Gt => BinaryOp::Gt,
            Tok::Ge => BinaryOp::Ge,
            Tok::Plus => BinaryOp::Add,
            Tok::Minus => BinaryOp::Sub,
            Tok::Star => BinaryOp::Mul,
            Tok::Slash => BinaryOp::Div,
            Tok::Percent => BinaryOp::Rem,
            _ => return None,
        })
    }

    /// Precedence climbing; all binary operators are left-associative.
    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = Self::binary_op(&self.peek().tok) {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let op_span = self.advance().span;
            let rhs = self.binary(prec + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = self.mk(
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span,
                Pos {
                    line: op_span.line,
                    col: op_span.col,
                },
            );
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let op = match self.peek().tok {
            Tok::Minus => UnaryOp::Neg,
            Tok::Bang => UnaryOp::Not,
            _ => return self.postfix(),
        };
        let start = self.advance().span;
        let operand = self.unary()?;
        let span = start.to(operand.span);
        Ok(self.mk(
            ExprKind::Unary {
                op,
                operand: Box::new(operand),
            },
            span,
            Pos {
                line: start.line,
                col: start.col,
            },
        ))
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.at(&Tok::LBracket) {
            self.advance();
            let index = self.expr()?;
            let end = self.expect(Tok::RBracket)?.span;
            let span = e.span.to(end);
            let anchor = e.anchor_start();
            e = self.mk(
                ExprKind::Index {
                    base: Box::new(e),
                    index: Box::new(index),
                },
                span,
                anchor,
            );
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self.peek().clone();
        let at = Pos {
            line: t.span.line,
            col: t.span.col,
        };
        match t.tok {
            Tok::Int(v) => {
                self.advance();
                Ok(self.mk(ExprKind::Int(v), t.span, at))
            }
            Tok::True | Tok::False => {
                self.advance();
                Ok(self.mk(ExprKind::Bool(t.tok == Tok::True), t.span, at))
            }
            Tok::Ident(name) => {
                self.advance();
                if self.at(&Tok::LParen) {
                    self.advance();
                    let args = self.comma_list(Tok::RParen)?;
                    let end = self.expect(Tok::RParen)?.span;
                    Ok(self.mk(
                        ExprKind::Call { callee: name, args },
                        t.span.to(end),
                        at,
                    ))
                } else {
                    Ok(self.mk(ExprKind::Var(name), t.span, at))
                }
            }
            Tok::LBracket => {
                self.advance();
                let items = self.comma_list(Tok::RBracket)?;
                let end = self.expect(Tok::RBracket)?.span;
                Ok(self.mk(ExprKind::Array(items), t.span.to(end), at))
            }
            Tok::LParen => {
                self.advance();
                let mut inner = self.expr()?;
                let end = self.expect(Tok::RParen)?.span;
                // Parentheses are not nodes; widen the span so text splicing
                // over this expression keeps them.
                inner.span = t.span.to(end);
                Ok(inner)
            }
            _ => Err(self.error_here("expression")),
        }
    }

    fn comma_list(&mut self, close: Tok) -> PResult<Vec<Expr>> {
        let mut items = Vec::new();
        if self.at(&close) {
            return Ok(items);
        }
        loop {
            items.push(self.expr()?);
            if self.at(&Tok::Comma) {
                self.advance();
            } else {
                return Ok(items);
            }
        }
    }
}

impl Expr {
    fn anchor_start(&self) -> Pos {
        Pos {
            line: self.span.line,
            col: self.span.col,
        }
    }
}
