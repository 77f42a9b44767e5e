/** LCD mirror: the gateway's 16x4 character buffer, reproduced exactly.
 *
 *  The API sends the four rendered rows; this module only verifies the
 *  shape and joins them for a monospace <pre>, so what the dashboard shows
 *  is character-for-character what the gateway display holds.
 */

export const LCD_ROWS = 4;
export const LCD_COLS = 16;

export function lcdMirrorText(rows: string[]): string {
  if (rows.length !== LCD_ROWS) {
    throw new Error(`LCD has exactly ${LCD_ROWS} rows, got ${rows.length}`);
  }
  for (const row of rows) {
    if (row.length !== LCD_COLS) {
      throw new Error(`LCD rows are exactly ${LCD_COLS} chars, got ${JSON.stringify(row)}`);
    }
  }
  return rows.join("\n");
}
