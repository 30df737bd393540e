# schemas: shared domain contracts
