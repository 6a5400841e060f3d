# Vantage - Source Package
