import { describe, expect, it } from 'vitest';

import { SessionApi } from '../src/api';
import { WhatIfPanel } from '../src/whatif';
import { scriptedFetch } from './helpers';

const BASE = 'http://test';

function panel(fetchFn: any, revealed: string[] = []) {
  return new WhatIfPanel(new SessionApi(BASE, fetchFn), 'sid-9', new Set(revealed), new Set(['loc', 'inc']));
}

describe('what-if panel', () => {
  it('previews a hypothetical reveal', async () => {
    const { fetchFn, calls } = scriptedFetch({
      'POST /sessions/sid-9/whatif': [
        {
          body: {
            feature: 'loc',
            normalized_value: 1.0,
            clipped: false,
            confidence_after: 1.0,
            would_decide: true,
            label_if_decided: 0,
          },
        },
      ],
    });
    const result = await panel(fetchFn).preview('loc', '1.0');
    expect(result.wouldDecide).toBe(true);
    expect(result.labelIfDecided).toBe(0);
    expect(calls[0].body).toEqual({ feature: 'loc', value: 1.0 });
  });

  it('disables previews for revealed features', () => {
    const { fetchFn } = scriptedFetch({});
    const p = panel(fetchFn, ['loc']);
    expect(p.canPreview('loc')).toBe(false);
    expect(p.canPreview('inc')).toBe(true);
  });

  it('disables previews for public features', () => {
    const { fetchFn } = scriptedFetch({});
    expect(panel(fetchFn).canPreview('job')).toBe(false);
  });

  it('tracks reveals reported by the wizard', () => {
    const { fetchFn } = scriptedFetch({});
    const p = panel(fetchFn);
    expect(p.canPreview('inc')).toBe(true);
    p.noteRevealed('inc');
    expect(p.canPreview('inc')).toBe(false);
  });

  it('rejects non-numeric values without calling the API', async () => {
    const { fetchFn, calls } = scriptedFetch({});
    await expect(panel(fetchFn).preview('loc', 'much')).rejects.toThrow('not a number');
    expect(calls).toHaveLength(0);
  });
});
