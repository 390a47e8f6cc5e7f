"""GACN - adversarial view generation for graph contrastive learning."""
