// cli layer below
