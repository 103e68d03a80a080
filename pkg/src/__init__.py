"""Source package initialization."""
