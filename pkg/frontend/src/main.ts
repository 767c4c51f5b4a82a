import { initMErrorPage } from "./merror_page.js";
import { initPowerPage } from "./power_page.js";

function showPage(name: string): void {
  document.querySelectorAll<HTMLElement>("main > section").forEach((section) => {
    section.hidden = section.dataset.page !== name;
  });
  document.querySelectorAll<HTMLButtonElement>("nav button").forEach((button) => {
    button.classList.toggle("active", button.dataset.page === name);
  });
}

document.addEventListener("DOMContentLoaded", () => {
  initPowerPage();
  initMErrorPage();
  document.querySelectorAll<HTMLButtonElement>("nav button").forEach((button) => {
    button.addEventListener("click", () => showPage(button.dataset.page ?? "power"));
  });
  showPage("power");
});
