"""First-order predicate language: AST, typechecker and evaluator."""
