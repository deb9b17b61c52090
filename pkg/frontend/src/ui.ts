// DOM rendering. The rating view deliberately renders no encode metadata:
// no setup number, CRF, resolution, or SSIM ever reaches the document.

import { RatingApi, medianResultSsim } from "./api.js";
import { FlowState, MIN_PLAYBACK_SECONDS, SessionFlow } from "./flow.js";

export class RatingView {
  constructor(
    private readonly root: HTMLElement,
    private readonly flow: SessionFlow,
    private readonly api: RatingApi,
  ) {}

  render(state: FlowState): void {
    switch (state.kind) {
      case "login":
        this.renderLogin(state.error);
        break;
      case "rating":
        this.renderRating(state);
        break;
      case "finished":
        this.renderFinished(state.session.step, state.session.category);
        break;
      case "fatal":
        this.root.innerHTML = `<p class="error" data-testid="fatal"></p>`;
        this.root.querySelector("p")!.textContent = state.message;
        break;
    }
  }

  private renderLogin(error: string | null): void {
    this.root.innerHTML = `
      <h1>Clip quality rating</h1>
      <form data-testid="login">
        <label>Participant token
          <input name="participant" data-testid="participant" required />
        </label>
        <label>Category
          <select name="category" data-testid="category">
            <option value="HR">Highly relevant</option>
            <option value="R">Relevant</option>
            <option value="SR">Somewhat relevant</option>
          </select>
        </label>
        <label>Catalog
          <input name="catalog" data-testid="catalog" required />
        </label>
        <button type="submit" data-testid="start">Start rating</button>
      </form>
      ${error ? `<p class="error" data-testid="login-error"></p>` : ""}
    `;
    if (error) {
      this.root.querySelector('[data-testid="login-error"]')!.textContent = error;
    }
    const form = this.root.querySelector("form")!;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const data = new FormData(form as HTMLFormElement);
      void this.flow.start(
        String(data.get("participant")),
        String(data.get("category")),
        String(data.get("catalog")),
      );
    });
  }

  private renderRating(
    state: Extract<FlowState, { kind: "rating" }>,
  ): void {
    const { session } = state;
    const clipUrl = this.api.clipUrl(session);
    this.root.innerHTML = `
      <h1>Is this quality sufficient?</h1>
      <p data-testid="step">Step ${session.step} of up to ${session.max_steps}</p>
      <video data-testid="player" autoplay loop muted playsinline></video>
      <p class="hint" data-testid="gate-hint">
        Watch at least ${MIN_PLAYBACK_SECONDS} seconds before judging.
      </p>
      <div class="verdicts">
        <button data-testid="accept" disabled>Quality sufficient</button>
        <button data-testid="reject" disabled>Not acceptable</button>
      </div>
      ${state.error ? `<p class="error" data-testid="error"></p>` : ""}
    `;
    if (state.error) {
      this.root.querySelector('[data-testid="error"]')!.textContent =
        `Could not reach the study server (${state.error}). ` +
        `Your progress is safe; try again.`;
    }

    // autoplay+muted starts playback without a user gesture; no explicit
    // play() call so non-playing environments (tests) stay quiet
    const video = this.root.querySelector("video")!;
    if (clipUrl) video.src = clipUrl;
    video.addEventListener("timeupdate", () => {
      this.flow.notePlayback(video.currentTime);
      this.syncGate();
    });

    const accept = this.root.querySelector<HTMLButtonElement>('[data-testid="accept"]')!;
    const reject = this.root.querySelector<HTMLButtonElement>('[data-testid="reject"]')!;
    accept.addEventListener("click", () => void this.flow.submitVerdict(true));
    reject.addEventListener("click", () => void this.flow.submitVerdict(false));
    this.syncGate();
  }

  private syncGate(): void {
    const enabled = this.flow.canJudge;
    for (const id of ["accept", "reject"]) {
      const button = this.root.querySelector<HTMLButtonElement>(
        `[data-testid="${id}"]`,
      );
      if (button) button.disabled = !enabled;
    }
    const hint = this.root.querySelector<HTMLElement>('[data-testid="gate-hint"]');
    if (hint) hint.style.visibility = enabled ? "hidden" : "visible";
  }

  private renderFinished(steps: number, category: string): void {
    this.root.innerHTML = `
      <h1>Rating complete</h1>
      <p data-testid="done">Thank you. You finished in ${steps} verdicts.</p>
      <p data-testid="threshold">Collecting panel results ...</p>
    `;
    void this.api
      .resultsCsv(category)
      .then((csv) => {
        const median = medianResultSsim(csv);
        const node = this.root.querySelector('[data-testid="threshold"]')!;
        node.textContent = median
          ? `Current panel quality threshold for ${category}: ` +
            `${median.toFixed(4)} structural similarity.`
          : `You are the first finished rater in ${category}.`;
      })
      .catch(() => {
        this.root.querySelector('[data-testid="threshold"]')!.textContent =
          "Panel results are not available right now.";
      });
  }
}

export function mount(
  root: HTMLElement,
  api: RatingApi,
  storage: Storage,
): SessionFlow {
  let view: RatingView;
  const flow = new SessionFlow(api, storage, (state) => view.render(state));
  view = new RatingView(root, flow, api);
  void flow.resume();
  return flow;
}
