from .records import CSV_COLUMNS, ResultRecord, read_csv, render_csv, write_csv
from .svg import emit_svg

__all__ = ['CSV_COLUMNS', 'ResultRecord', 'read_csv', 'render_csv', 'write_csv', 'emit_svg']
