import pandas as pd

FAMILY_COLORS = {'base': '#E6194B', 'simplified': '#000000', 'shared': '#4363D8'}
FLAG_COLUMNS = ['sep_stack', 'sep_dil', 'pw_stack', 'pw_dil']


def generate_hex_colors(names):
    palette = [
        '#E6194B', '#3CB44B', '#FFE119', '#4363D8', '#F58231',
        '#911EB4', '#46FBEB', '#F032E6', '#BCF60C', '#FABEBE',
        '#008080', '#E6BEFF', '#9A6324', '#FFFAC8', '#800000'
    ]
    color_map = {}
    for i, name in enumerate(names):
        color_map[name] = palette[i % len(palette)]
    return color_map


def family_colors(families):
    """Fixed colors for base/simplified/shared, palette colors for anything else."""
    extra = [f for f in families if f not in FAMILY_COLORS]
    colors = dict(FAMILY_COLORS)
    for name, color in generate_hex_colors(extra).items():
        colors[name] = color if color not in FAMILY_COLORS.values() else '#3CB44B'
    return colors


def export_ablation_to_excel(table: pd.DataFrame, plot_data: pd.DataFrame, filename="ablation.xlsx", highlight_scheme="ss", verbose=True):
    """Two-sheet workbook: the results table (checkbox columns, highlighted
    ``highlight_scheme`` rows) and the size-vs-SI-SNRi plot data."""
    with pd.ExcelWriter(filename, engine='xlsxwriter') as writer:
        workbook = writer.book

        # formatting definitions
        header_fmt = workbook.add_format({'bold': True, 'align': 'center', 'bg_color': '#D3D3D3', 'border': 1})
        text_fmt = workbook.add_format({'align': 'left', 'border': 1})
        check_fmt = workbook.add_format({'align': 'center', 'border': 1})
        num_fmt = workbook.add_format({'align': 'center', 'border': 1, 'num_format': '#,##0'})
        pct_fmt = workbook.add_format({'align': 'center', 'border': 1, 'num_format': '0.0"%"'})
        db_fmt = workbook.add_format({'align': 'center', 'border': 1, 'num_format': '0.00'})
        hl = {'bg_color': '#FFF2CC', 'bold': True}
        hl_formats = {
            'text': workbook.add_format({'align': 'left', 'border': 1, **hl}),
            'check': workbook.add_format({'align': 'center', 'border': 1, **hl}),
            'num': workbook.add_format({'align': 'center', 'border': 1, 'num_format': '#,##0', **hl}),
            'pct': workbook.add_format({'align': 'center', 'border': 1, 'num_format': '0.0"%"', **hl}),
            'db': workbook.add_format({'align': 'center', 'border': 1, 'num_format': '0.00', **hl}),
        }
        plain = {'text': text_fmt, 'check': check_fmt, 'num': num_fmt, 'pct': pct_fmt, 'db': db_fmt}

        # --- SHEET 1: ABLATION TABLE ---
        ws = workbook.add_worksheet('Ablation')
        writer.sheets['Ablation'] = ws
        columns = list(table.columns)
        for col, name in enumerate(columns):
            ws.write(0, col, name, header_fmt)

        kinds = {}
        for name in columns:
            if name in FLAG_COLUMNS:
                kinds[name] = 'check'
            elif name == 'size_params':
                kinds[name] = 'num'
            elif name == 'compression_pct':
                kinds[name] = 'pct'
            elif name.endswith('_db'):
                kinds[name] = 'db'
            else:
                kinds[name] = 'text'

        for r, row in enumerate(table.itertuples(index=False), start=1):
            formats = hl_formats if getattr(row, 'scheme', None) == highlight_scheme else plain
            for col, name in enumerate(columns):
                value = row[col]
                if kinds[name] == 'check':
                    value = '✓' if bool(value) else ''
                elif pd.isna(value):
                    value = ''
                ws.write(r, col, value, formats[kinds[name]])

        ws.set_column(0, 0, 34)
        ws.set_column(1, len(columns) - 1, 13)
        ws.freeze_panes(1, 1)

        # --- SHEET 2: SIZE VS SI-SNRi ---
        plot_data.to_excel(writer, sheet_name='Size-vs-SI-SNRi', index=False, startrow=1, header=False)
        ws_p = writer.sheets['Size-vs-SI-SNRi']
        for col, name in enumerate(plot_data.columns):
            ws_p.write(0, col, name, header_fmt)

        colors = family_colors(sorted(plot_data['family'].unique()) if 'family' in plot_data else [])
        family_col = list(plot_data.columns).index('family') if 'family' in plot_data else None
        if family_col is not None:
            fam_formats = {f: workbook.add_format({'bg_color': c, 'font_color': 'white', 'bold': 1, 'border': 1, 'align': 'center'})
                           for f, c in colors.items()}
            for r, fam in enumerate(plot_data['family'], start=1):
                ws_p.write(r, family_col, fam, fam_formats[fam])
        ws_p.set_column(0, 0, 34)
        ws_p.set_column(1, len(plot_data.columns) - 1, 13)

    if verbose:
        print(f"Workbook saved to: {filename}")
    return filename
