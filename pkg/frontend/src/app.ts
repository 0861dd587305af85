import { ApiClient } from "./api.js";
import { h, mount, VNode } from "./vdom.js";
import { ViewModel } from "./viewmodel.js";
import { renderPhaseHeader } from "./views/phases.js";
import { renderSequenceView } from "./views/sequence.js";

/** Browser entry point: loads the session named in the URL hash
 * (#<session-id>) and re-renders the workspace on every state change. */
export function start(doc: Document, apiBase = ""): ViewModel {
  const api = new ApiClient(apiBase);
  const vm = new ViewModel(api);
  const root = doc.getElementById("app") ?? doc.body;

  const render = () => {
    const children: VNode[] = [
      renderPhaseHeader(vm.phase, vm.session?.phase_completion ?? {}, (p) => {
        vm.setPhase(p).catch(() => undefined); // gate rejections keep state
      }),
    ];
    const segments = vm.session?.segments;
    if (segments && vm.loops) {
      children.push(
        renderSequenceView(segments.scaffold, vm.loops.scaffold, "scaffold"),
        renderSequenceView(segments.insert, vm.loops.insert, "insert"),
      );
    }
    root.replaceChildren(mount(h("div", { class: "workspace" }, children), doc));
  };

  vm.onChange(render);
  const sessionId = doc.location.hash.replace(/^#/, "");
  if (sessionId) void vm.load(sessionId);
  render();
  return vm;
}
