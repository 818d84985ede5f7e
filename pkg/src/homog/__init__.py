"""Revenue of homogeneous versus mixed economies of bidders."""
