"""Rule checkers: model well-formedness, system well-formedness and conformance."""
