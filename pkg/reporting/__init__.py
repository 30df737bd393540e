# reporting/: text, CSV and JSON renderers plus the atomic report writer
