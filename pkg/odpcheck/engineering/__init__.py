"""Engineering-viewpoint structures: tags, containment, channels, invocation and mobility."""
