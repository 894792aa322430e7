# Analytics Package
